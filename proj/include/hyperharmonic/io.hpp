/**
 * File formats: JSON documents for every intermediate product and CSV tables
 * for plot-ready outputs.
 *
 * CSVs use ',' as separator, '.' as decimal mark, LF line endings and the
 * shortest round-trip representation of every double, so identical inputs
 * produce byte-identical files.
 */
#pragma once

#include <charconv>
#include <filesystem>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hyperharmonic/complex.hpp"
#include "hyperharmonic/distribution.hpp"
#include "hyperharmonic/errors.hpp"
#include "hyperharmonic/infotheory.hpp"
#include "hyperharmonic/spectral.hpp"
#include "hyperharmonic/transform.hpp"

namespace hyperharmonic::io {

using json = nlohmann::ordered_json;

inline std::string format_double(double value)
{
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc())
        throw Error("failed to format a floating-point value");
    return std::string(buffer, end);
}

/// Writes via a temporary sibling and a rename, so readers never see a
/// truncated file.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
        throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out)
            throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_json(const std::filesystem::path& path, const json& doc)
{
    write_text_atomic(path, doc.dump(2) + "\n");
}

inline json read_json(const std::filesystem::path& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

/// Row-oriented CSV builder.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header)
    {
        add_row(header);
    }

    template <typename... Fields>
    void row(const Fields&... fields)
    {
        std::vector<std::string> cells{cell(fields)...};
        add_row(cells);
    }

    const std::string& str() const { return text_; }
    void save(const std::filesystem::path& path) const { write_text_atomic(path, text_); }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <typename I>
        requires std::is_integral_v<I>
    static std::string cell(I v)
    {
        return std::to_string(v);
    }

    void add_row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    std::string text_;
};

// ---------------------------------------------------------------------------
// Eigen helpers
// ---------------------------------------------------------------------------

inline json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline json to_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::VectorXd vector_from_json(const json& j)
{
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline Eigen::MatrixXd matrix_from_json(const json& j)
{
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        detail::require(static_cast<Eigen::Index>(j.at(r).size()) == cols, "ragged matrix in JSON document");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

template <typename F>
auto parse_document(const std::string& what, F&& f)
{
    try {
        return f();
    } catch (const json::exception& e) {
        throw ValidationError("malformed " + what + " document: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Estimated models
// ---------------------------------------------------------------------------

/// Either kind of estimated model, as stored in distribution.json.
struct EstimatedModel {
    std::vector<std::string> variable_names;
    std::optional<JointDistribution> discrete;
    std::optional<GaussianModel> gaussian;

    int num_variables() const { return discrete ? discrete->num_variables() : gaussian->num_variables(); }

    std::unique_ptr<EntropyOracle> oracle() const
    {
        if (discrete)
            return std::make_unique<DiscreteEntropyOracle>(*discrete);
        return std::make_unique<GaussianEntropyOracle>(*gaussian);
    }

    Eigen::MatrixXd similarity(SimilarityMetric metric) const
    {
        return discrete ? similarity_matrix(*discrete, metric) : similarity_matrix(*gaussian, metric);
    }
};

inline json to_json(const EstimatedModel& model)
{
    json j;
    j["variable_names"] = model.variable_names;
    if (model.discrete) {
        j["kind"] = "discrete";
        j["alphabet_sizes"] = model.discrete->alphabet_sizes();
        json outcomes = json::array();
        json probabilities = json::array();
        for (const auto& [outcome, p] : model.discrete->mass()) {
            outcomes.push_back(outcome);
            probabilities.push_back(p);
        }
        j["outcomes"] = std::move(outcomes);
        j["probabilities"] = std::move(probabilities);
    } else {
        j["kind"] = "gaussian";
        j["correlation"] = to_json(model.gaussian->correlation_matrix());
    }
    return j;
}

inline EstimatedModel model_from_json(const json& j)
{
    return parse_document("distribution", [&] {
        EstimatedModel model;
        model.variable_names = j.at("variable_names").get<std::vector<std::string>>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "discrete") {
            const auto outcomes = j.at("outcomes").get<std::vector<Outcome>>();
            const auto probabilities = j.at("probabilities").get<std::vector<double>>();
            detail::require(outcomes.size() == probabilities.size(), "outcomes and probabilities differ in length");
            JointDistribution::MassMap mass;
            for (std::size_t i = 0; i < outcomes.size(); ++i)
                mass.emplace(outcomes[i], probabilities[i]);
            model.discrete.emplace(j.at("alphabet_sizes").get<std::vector<int>>(), std::move(mass));
        } else if (kind == "gaussian") {
            model.gaussian.emplace(matrix_from_json(j.at("correlation")));
        } else {
            throw ValidationError("unknown distribution kind '" + kind + "'");
        }
        detail::require(static_cast<int>(model.variable_names.size()) == model.num_variables(),
                        "variable_names does not match the number of variables");
        return model;
    });
}

// ---------------------------------------------------------------------------
// Structural simplex and boundary matrices
// ---------------------------------------------------------------------------

struct StructuralDocument {
    std::vector<std::string> variable_names;
    SimilarityMetric metric = SimilarityMetric::mutual_information;
    WeightAggregator aggregator = WeightAggregator::mean;
    double floor = kDefaultWeightFloor;
    Eigen::MatrixXd similarity;
    StructuralSimplex simplex{0, {Eigen::VectorXd::Ones(1)}};
};

inline json to_json(const StructuralDocument& doc)
{
    json j;
    j["variable_names"] = doc.variable_names;
    j["N"] = doc.simplex.N();
    j["metric"] = to_string(doc.metric);
    j["aggregator"] = to_string(doc.aggregator);
    j["floor"] = doc.floor;
    j["similarity"] = to_json(doc.similarity);
    json weights = json::array();
    for (int n = 0; n <= doc.simplex.N(); ++n)
        weights.push_back(to_json(doc.simplex.weights(n)));
    j["weights"] = std::move(weights);
    return j;
}

inline StructuralDocument structural_from_json(const json& j)
{
    return parse_document("structural simplex", [&] {
        StructuralDocument doc;
        doc.variable_names = j.at("variable_names").get<std::vector<std::string>>();
        doc.metric = parse_similarity_metric(j.at("metric").get<std::string>());
        doc.aggregator = parse_aggregator(j.at("aggregator").get<std::string>());
        doc.floor = j.at("floor").get<double>();
        doc.similarity = matrix_from_json(j.at("similarity"));
        std::vector<Eigen::VectorXd> weights;
        for (const auto& w : j.at("weights"))
            weights.push_back(vector_from_json(w));
        doc.simplex = StructuralSimplex(j.at("N").get<int>(), std::move(weights));
        return doc;
    });
}

/// (row, col, value) triplets of a boundary matrix.
inline CsvTable boundary_csv(const BoundaryMatrix& b)
{
    CsvTable t({"row", "col", "value"});
    for (const auto& e : b.entries)
        t.row(static_cast<long long>(e.row), static_cast<long long>(e.col), e.value);
    return t;
}

inline CsvTable weights_csv(const StructuralSimplex& s, int n)
{
    CsvTable t({"simplex", "weight"});
    const auto simplices = enumerate_simplices(s.N(), n);
    for (std::size_t k = 0; k < simplices.size(); ++k)
        t.row(simplices[k].label(), s.weights(n)(static_cast<Eigen::Index>(k)));
    return t;
}

// ---------------------------------------------------------------------------
// Signals
// ---------------------------------------------------------------------------

inline json to_json(const HighOrderSignal& s)
{
    json j;
    j["N"] = s.N();
    j["n"] = s.dimension();
    j["measure"] = to_string(s.measure());
    j["basis"] = to_string(s.basis().kind);
    if (!s.basis().id.empty())
        j["basis_id"] = s.basis().id;
    j["coefficients"] = to_json(s.coefficients());
    return j;
}

inline HighOrderSignal signal_from_json(const json& j)
{
    return parse_document("signal", [&] {
        BasisTag tag{parse_basis_kind(j.at("basis").get<std::string>()), j.value("basis_id", std::string{})};
        return HighOrderSignal(j.at("N").get<int>(), j.at("n").get<int>(), vector_from_json(j.at("coefficients")),
                               std::move(tag), parse_measure_kind(j.at("measure").get<std::string>()));
    });
}

inline json signals_document(const std::vector<HighOrderSignal>& signals, const std::vector<std::string>& names)
{
    json j;
    j["variable_names"] = names;
    json list = json::array();
    for (const auto& s : signals)
        list.push_back(to_json(s));
    j["signals"] = std::move(list);
    return j;
}

inline std::vector<HighOrderSignal> signals_from_document(const json& j)
{
    return parse_document("signals", [&] {
        std::vector<HighOrderSignal> out;
        for (const auto& s : j.at("signals"))
            out.push_back(signal_from_json(s));
        return out;
    });
}

/// Canonical sweep as (subset label, value) rows.
inline CsvTable canonical_signal_csv(const HighOrderSignal& s)
{
    CsvTable t({"simplex", "value"});
    const auto simplices = enumerate_simplices(s.N(), s.dimension());
    for (std::size_t k = 0; k < simplices.size(); ++k)
        t.row(simplices[k].label(), s.coefficients()(static_cast<Eigen::Index>(k)));
    return t;
}

inline CsvTable fourier_signal_csv(const HighOrderSignal& s, const FourierBasis& basis)
{
    CsvTable t({"component", "eigenvalue", "value"});
    for (Eigen::Index k = 0; k < s.size(); ++k)
        t.row(static_cast<long long>(k), basis.eigenvalues(k), s.coefficients()(k));
    return t;
}

// ---------------------------------------------------------------------------
// Fourier bases
// ---------------------------------------------------------------------------

inline json to_json(const BasisDiagnostics& d)
{
    return json{{"self_adjointness", d.self_adjointness},
                {"diagonalization", d.diagonalization},
                {"orthonormality", d.orthonormality},
                {"inverse", d.inverse}};
}

inline json to_json(const FourierBasis& b, double kernel_tolerance = kKernelTolerance)
{
    json j;
    j["n"] = b.n;
    j["form"] = to_string(b.form);
    j["kernel_dimension"] = kernel_dimension(b.eigenvalues, kernel_tolerance);
    j["diagnostics"] = to_json(b.diagnostics);
    j["weights"] = to_json(b.inner.weights());
    j["eigenvalues"] = to_json(b.eigenvalues);
    j["forward"] = to_json(b.forward);
    j["inverse"] = to_json(b.inverse);
    return j;
}

inline FourierBasis basis_from_json(const json& j)
{
    return parse_document("spectrum", [&] {
        FourierBasis b;
        b.n = j.at("n").get<int>();
        b.form = parse_laplacian_form(j.at("form").get<std::string>());
        b.inner = WeightedInnerProduct(b.n, vector_from_json(j.at("weights")));
        b.eigenvalues = vector_from_json(j.at("eigenvalues"));
        b.forward = matrix_from_json(j.at("forward"));
        b.inverse = matrix_from_json(j.at("inverse"));
        const auto d = b.eigenvalues.size();
        detail::require(b.forward.rows() == d && b.forward.cols() == d && b.inverse.rows() == d &&
                            b.inverse.cols() == d && b.inner.size() == d,
                        "spectrum matrices have inconsistent dimensions");
        const auto& diag = j.at("diagnostics");
        b.diagnostics = {diag.at("self_adjointness").get<double>(), diag.at("diagonalization").get<double>(),
                         diag.at("orthonormality").get<double>(), diag.at("inverse").get<double>()};
        return b;
    });
}

inline CsvTable eigenvalues_csv(const FourierBasis& b)
{
    CsvTable t({"component", "eigenvalue"});
    for (Eigen::Index k = 0; k < b.eigenvalues.size(); ++k)
        t.row(static_cast<long long>(k), b.eigenvalues(k));
    return t;
}

// ---------------------------------------------------------------------------
// Explained variance
// ---------------------------------------------------------------------------

inline std::string threshold_label(double threshold)
{
    return std::to_string(static_cast<int>(std::lround(threshold * 100.0)));
}

inline CsvTable cev_csv(const CevReport& r)
{
    CsvTable t({"k", "ev", "cev"});
    for (Eigen::Index k = 0; k < r.cev.size(); ++k)
        t.row(static_cast<long long>(k + 1), r.sorted_ev(k), r.cev(k));
    return t;
}

inline json to_json(const CevReport& r)
{
    json components = json::object();
    for (const auto& [threshold, k] : r.components_at)
        components[threshold_label(threshold)] = k;
    json order = json::array();
    for (auto i : r.order)
        order.push_back(static_cast<long long>(i));
    return json{{"sorted_ev", to_json(r.sorted_ev)},
                {"cev", to_json(r.cev)},
                {"order", std::move(order)},
                {"components_at", std::move(components)}};
}

}  // namespace hyperharmonic::io
