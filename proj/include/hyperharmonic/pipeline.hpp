/**
 * Batch orchestration: configuration, the staged pipeline behind each CLI
 * subcommand, and output bundles with replayable manifests.
 *
 * Every stage writes into an output directory. While a stage runs the
 * directory holds an INCOMPLETE marker; it is removed only after all files
 * have been written, and on failure it is left in place with the error text.
 */
#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hyperharmonic/complex.hpp"
#include "hyperharmonic/distribution.hpp"
#include "hyperharmonic/errors.hpp"
#include "hyperharmonic/infotheory.hpp"
#include "hyperharmonic/io.hpp"
#include "hyperharmonic/random.hpp"
#include "hyperharmonic/spectral.hpp"
#include "hyperharmonic/synth.hpp"
#include "hyperharmonic/transform.hpp"
#include "hyperharmonic/units.hpp"

namespace hyperharmonic {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kOutputDirEnv = "HYPERHARMONIC_OUTPUT_DIR";
inline constexpr const char* kIncompleteMarker = "INCOMPLETE";

enum class DataKind { discrete, continuous };

struct PipelineConfig {
    // inputs
    std::string input;
    DataKind kind = DataKind::discrete;
    std::string distribution;  ///< distribution.json for staged subcommands
    std::string structural;    ///< structural.json
    std::string signals;       ///< signals.json
    std::string spectrum_dir;  ///< directory holding spectrum_n<n>.json

    // analysis
    std::vector<int> dimensions;  ///< empty: 2 .. min(N, 5)
    std::vector<MeasureKind> measures{MeasureKind::o_information, MeasureKind::s_information};
    SimilarityMetric metric = SimilarityMetric::mutual_information;
    WeightAggregator aggregator = WeightAggregator::mean;
    double weight_floor = kDefaultWeightFloor;
    double smoothing = 0.0;
    LaplacianForm laplacian = LaplacianForm::derived;
    double kernel_tolerance = kKernelTolerance;
    int max_n = kDefaultMaxN;
    LogBase log_base = LogBase::bits;

    // controls
    int random_bases = 80;
    RandomBasisInner random_inner = RandomBasisInner::weighted;
    std::vector<int> ranks{2, 9};
    int replicates = 50;
    std::size_t samples = 10000;
    int size = 9;
    int synth_random_bases = 0;

    std::uint64_t seed = 0;

    // execution; neither affects results, so neither is recorded in manifests
    std::string output_dir;
    int jobs = 1;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string_view t = trim(item);
        if (!t.empty())
            out.emplace_back(t);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value)
{
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
        throw ValidationError("setting '" + key + "': cannot parse '" + value + "'");
    return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& value)
{
    std::vector<int> out;
    for (const auto& item : split_list(value))
        out.push_back(parse_number<int>(key, item));
    return out;
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& f)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += ',';
        out += f(items[i]);
    }
    return out;
}

}  // namespace detail

/// Applies one `key = value` setting. Keys match the long CLI flag names.
inline void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value)
{
    using detail::parse_number;
    if (key == "input") cfg.input = value;
    else if (key == "kind") {
        if (value == "discrete") cfg.kind = DataKind::discrete;
        else if (value == "continuous") cfg.kind = DataKind::continuous;
        else throw ValidationError("setting 'kind' must be discrete or continuous");
    }
    else if (key == "distribution") cfg.distribution = value;
    else if (key == "structural") cfg.structural = value;
    else if (key == "signals") cfg.signals = value;
    else if (key == "spectrum-dir") cfg.spectrum_dir = value;
    else if (key == "dimensions") cfg.dimensions = detail::parse_int_list(key, value);
    else if (key == "measures") {
        cfg.measures.clear();
        for (const auto& m : detail::split_list(value))
            cfg.measures.push_back(parse_measure_kind(m));
    }
    else if (key == "metric") cfg.metric = parse_similarity_metric(value);
    else if (key == "aggregator") cfg.aggregator = parse_aggregator(value);
    else if (key == "floor") cfg.weight_floor = parse_number<double>(key, value);
    else if (key == "smoothing") cfg.smoothing = parse_number<double>(key, value);
    else if (key == "laplacian") cfg.laplacian = parse_laplacian_form(value);
    else if (key == "kernel-tolerance") cfg.kernel_tolerance = parse_number<double>(key, value);
    else if (key == "max-n") cfg.max_n = parse_number<int>(key, value);
    else if (key == "log-base") {
        if (value == "bits") cfg.log_base = LogBase::bits;
        else if (value == "nats") cfg.log_base = LogBase::nats;
        else throw ValidationError("setting 'log-base' must be bits or nats");
    }
    else if (key == "random-bases") cfg.random_bases = parse_number<int>(key, value);
    else if (key == "random-inner") {
        if (value == "weighted") cfg.random_inner = RandomBasisInner::weighted;
        else if (value == "euclidean") cfg.random_inner = RandomBasisInner::euclidean;
        else throw ValidationError("setting 'random-inner' must be weighted or euclidean");
    }
    else if (key == "ranks") cfg.ranks = detail::parse_int_list(key, value);
    else if (key == "replicates") cfg.replicates = parse_number<int>(key, value);
    else if (key == "samples") cfg.samples = parse_number<std::size_t>(key, value);
    else if (key == "size") cfg.size = parse_number<int>(key, value);
    else if (key == "synth-random-bases") cfg.synth_random_bases = parse_number<int>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "output") cfg.output_dir = value;
    else if (key == "jobs") cfg.jobs = parse_number<int>(key, value);
    else throw ValidationError("unknown setting '" + key + "'");
}

/// Every result-affecting setting in canonical text form, in a fixed order.
inline std::vector<std::pair<std::string, std::string>> recorded_settings(const PipelineConfig& cfg)
{
    using detail::join;
    const auto fmt = [](double v) { return io::format_double(v); };
    const auto ints = [](const std::vector<int>& v) {
        return join<int>(v, [](const int& x) { return std::to_string(x); });
    };
    return {
        {"input", cfg.input},
        {"kind", cfg.kind == DataKind::discrete ? "discrete" : "continuous"},
        {"distribution", cfg.distribution},
        {"structural", cfg.structural},
        {"signals", cfg.signals},
        {"spectrum-dir", cfg.spectrum_dir},
        {"dimensions", ints(cfg.dimensions)},
        {"measures", join<MeasureKind>(cfg.measures, [](const MeasureKind& m) { return to_string(m); })},
        {"metric", to_string(cfg.metric)},
        {"aggregator", to_string(cfg.aggregator)},
        {"floor", fmt(cfg.weight_floor)},
        {"smoothing", fmt(cfg.smoothing)},
        {"laplacian", to_string(cfg.laplacian)},
        {"kernel-tolerance", fmt(cfg.kernel_tolerance)},
        {"max-n", std::to_string(cfg.max_n)},
        {"log-base", cfg.log_base == LogBase::bits ? "bits" : "nats"},
        {"random-bases", std::to_string(cfg.random_bases)},
        {"random-inner", cfg.random_inner == RandomBasisInner::weighted ? "weighted" : "euclidean"},
        {"ranks", ints(cfg.ranks)},
        {"replicates", std::to_string(cfg.replicates)},
        {"samples", std::to_string(cfg.samples)},
        {"size", std::to_string(cfg.size)},
        {"synth-random-bases", std::to_string(cfg.synth_random_bases)},
        {"seed", std::to_string(cfg.seed)},
    };
}

/// Flat `key = value` lines; blank lines and '#' comments are ignored.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(text);
    std::string line;
    int number = 0;
    while (std::getline(ss, line)) {
        ++number;
        const std::string_view t = detail::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("config line " + std::to_string(number) + ": expected key = value");
        out.emplace_back(std::string(detail::trim(t.substr(0, eq))), std::string(detail::trim(t.substr(eq + 1))));
    }
    return out;
}

inline void load_config_file(PipelineConfig& cfg, const std::string& path)
{
    for (const auto& [key, value] : parse_config_text(io::read_text(path)))
        apply_setting(cfg, key, value);
}

/// Restores every recorded setting from a manifest.json.
inline void load_manifest(PipelineConfig& cfg, const std::string& path)
{
    const io::json manifest = io::read_json(path);
    io::parse_document("manifest", [&] {
        for (const auto& [key, value] : manifest.at("settings").items())
            apply_setting(cfg, key, value.get<std::string>());
        return 0;
    });
}

inline void validate_config(const PipelineConfig& cfg)
{
    detail::require(cfg.weight_floor > 0.0 && std::isfinite(cfg.weight_floor), "floor must be positive");
    detail::require(cfg.kernel_tolerance > 0.0 && std::isfinite(cfg.kernel_tolerance),
                    "kernel-tolerance must be positive");
    detail::require(cfg.smoothing >= 0.0, "smoothing must be non-negative");
    detail::require(cfg.random_bases >= 1, "random-bases must be at least 1");
    detail::require(cfg.synth_random_bases >= 0, "synth-random-bases must be non-negative");
    detail::require(cfg.replicates >= 1, "replicates must be at least 1");
    detail::require(cfg.jobs >= 1, "jobs must be at least 1");
    detail::require(cfg.max_n >= 1, "max-n must be at least 1");
    detail::require(!cfg.measures.empty(), "at least one measure is required");
}

inline std::filesystem::path resolve_output_dir(const PipelineConfig& cfg)
{
    if (!cfg.output_dir.empty())
        return cfg.output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env)
        return env;
    return "hyperharmonic-out";
}

// ---------------------------------------------------------------------------
// Output bundle bookkeeping
// ---------------------------------------------------------------------------

/// Marks a directory incomplete for the lifetime of a stage.
class OutputBundle {
public:
    explicit OutputBundle(std::filesystem::path root) : root_(std::move(root))
    {
        std::error_code ec;
        std::filesystem::create_directories(root_, ec);
        if (ec)
            throw IoError("cannot create output directory '" + root_.string() + "': " + ec.message());
        io::write_text_atomic(root_ / kIncompleteMarker, "stage in progress\n");
    }

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path operator/(const std::string& rel) const { return root_ / rel; }

    void fail(const std::string& message) const
    {
        try {
            io::write_text_atomic(root_ / kIncompleteMarker, "stage failed: " + message + "\n");
        } catch (...) {
        }
    }

    void complete() const
    {
        std::error_code ec;
        std::filesystem::remove(root_ / kIncompleteMarker, ec);
        if (ec)
            throw IoError("cannot remove the incomplete marker: " + ec.message());
    }

private:
    std::filesystem::path root_;
};

inline io::json manifest_json(const PipelineConfig& cfg, const std::string& command, io::json extra = io::json::object())
{
    io::json settings = io::json::object();
    for (const auto& [key, value] : recorded_settings(cfg))
        settings[key] = value;
    io::json m;
    m["tool"] = "hyperharmonic";
    m["version"] = kVersion;
    m["command"] = command;
    m["settings"] = std::move(settings);
    for (auto& [key, value] : extra.items())
        m[key] = value;
    return m;
}

/// Runs `body` inside an output bundle, writing the manifest last.
template <typename Body>
void run_stage(const PipelineConfig& cfg, const std::string& command, Body&& body)
{
    validate_config(cfg);
    const ScopedLogBase unit(cfg.log_base);
    OutputBundle bundle(resolve_output_dir(cfg));
    try {
        io::json extra = body(bundle);
        io::write_json(bundle / "manifest.json", manifest_json(cfg, command, std::move(extra)));
        bundle.complete();
    } catch (const std::exception& e) {
        bundle.fail(e.what());
        throw;
    }
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

namespace detail {

inline io::EstimatedModel estimate_model(const PipelineConfig& cfg)
{
    require(!cfg.input.empty(), "an input CSV is required (--input)");
    io::EstimatedModel model;
    if (cfg.kind == DataKind::discrete) {
        const DiscreteSeriesTable table = read_discrete_csv(cfg.input);
        model.variable_names = table.variable_names();
        model.discrete.emplace(estimate_empirical(table, cfg.smoothing));
    } else {
        const ContinuousSeriesTable table = read_continuous_csv(cfg.input);
        model.variable_names = table.variable_names();
        model.gaussian.emplace(copula_gaussian_fit(table));
    }
    return model;
}

inline io::EstimatedModel load_or_estimate_model(const PipelineConfig& cfg)
{
    if (!cfg.distribution.empty())
        return io::model_from_json(io::read_json(cfg.distribution));
    return estimate_model(cfg);
}

inline io::StructuralDocument build_structural(const PipelineConfig& cfg, const io::EstimatedModel& model)
{
    io::StructuralDocument doc;
    doc.variable_names = model.variable_names;
    doc.metric = cfg.metric;
    doc.aggregator = cfg.aggregator;
    doc.floor = cfg.weight_floor;
    doc.similarity = model.similarity(cfg.metric);
    doc.simplex = structural_weights(doc.similarity, cfg.aggregator, cfg.weight_floor, cfg.max_n);
    return doc;
}

inline std::vector<int> resolve_dimensions(const PipelineConfig& cfg, int N)
{
    std::vector<int> dims = cfg.dimensions;
    if (dims.empty())
        for (int n = 2; n <= std::min(N, 5); ++n)
            dims.push_back(n);
    require(!dims.empty(), "no signal dimensions available: N = " + std::to_string(N) + " < 2");
    for (int n : dims)
        require(n >= 2 && n <= N, "dimension " + std::to_string(n) + " outside [2, N = " + std::to_string(N) + "]");
    return dims;
}

inline std::string signal_stem(MeasureKind m, int n) { return to_string(m) + "_n" + std::to_string(n); }

inline std::string spectrum_file(int n) { return "spectrum_n" + std::to_string(n) + ".json"; }

inline FourierBasis load_basis(const std::string& dir, int n)
{
    require(!dir.empty(), "a spectrum directory is required (--spectrum-dir)");
    return io::basis_from_json(io::read_json(std::filesystem::path(dir) / spectrum_file(n)));
}

inline std::vector<HighOrderSignal> compute_signals(const EntropyOracle& oracle, const StructuralSimplex& s,
                                                    const std::vector<int>& dims,
                                                    const std::vector<MeasureKind>& measures)
{
    std::vector<HighOrderSignal> out;
    for (int n : dims)
        for (MeasureKind m : measures)
            out.push_back(build_signal(oracle, s, n, m));
    return out;
}

inline void write_spectrum(const OutputBundle& bundle, const FourierBasis& b, double kernel_tolerance)
{
    io::write_json(bundle / ("spectrum/" + spectrum_file(b.n)), io::to_json(b, kernel_tolerance));
    io::eigenvalues_csv(b).save(bundle / ("spectrum/eigenvalues_n" + std::to_string(b.n) + ".csv"));
}

struct CevOutcome {
    std::optional<CevReport> report;
    std::string error;
};

inline CevOutcome try_cev(const HighOrderSignal& s)
{
    try {
        return {cev_report(s), {}};
    } catch (const NumericalError& e) {
        return {std::nullopt, e.what()};
    }
}

}  // namespace detail

/// Step 1: estimate the joint model from a CSV.
inline void run_estimate(const PipelineConfig& cfg)
{
    run_stage(cfg, "estimate", [&](const OutputBundle& bundle) {
        const io::EstimatedModel model = detail::estimate_model(cfg);
        io::write_json(bundle / "distribution.json", io::to_json(model));
        return io::json::object();
    });
}

/// Step 2: structural simplex, plus boundary matrices and weights as CSV.
inline void run_complex(const PipelineConfig& cfg)
{
    run_stage(cfg, "complex", [&](const OutputBundle& bundle) {
        const io::StructuralDocument doc = detail::build_structural(cfg, detail::load_or_estimate_model(cfg));
        io::write_json(bundle / "structural.json", io::to_json(doc));
        const int N = doc.simplex.N();
        for (int n = 0; n <= N; ++n) {
            io::weights_csv(doc.simplex, n).save(bundle / ("complex/weights_n" + std::to_string(n) + ".csv"));
            io::boundary_csv(boundary_matrix(N, n)).save(bundle / ("complex/boundary_n" + std::to_string(n) + ".csv"));
        }
        return io::json::object();
    });
}

/// Step 3: canonical high-order signals.
inline void run_signals(const PipelineConfig& cfg)
{
    run_stage(cfg, "signals", [&](const OutputBundle& bundle) {
        const io::EstimatedModel model = detail::load_or_estimate_model(cfg);
        const int N = model.num_variables() - 1;
        const auto dims = detail::resolve_dimensions(cfg, N);
        const auto oracle = model.oracle();
        std::vector<HighOrderSignal> signals;
        for (int n : dims)
            for (MeasureKind m : cfg.measures)
                signals.emplace_back(N, n, signal_sweep(*oracle, N, n, m), BasisTag{}, m);
        io::write_json(bundle / "signals.json", io::signals_document(signals, model.variable_names));
        for (const auto& s : signals)
            io::canonical_signal_csv(s).save(bundle /
                                             ("signals/" + detail::signal_stem(s.measure(), s.dimension()) + ".csv"));
        return io::json::object();
    });
}

/// Steps 4-5: Laplacians and Fourier bases with residual diagnostics.
inline void run_spectrum(const PipelineConfig& cfg)
{
    run_stage(cfg, "spectrum", [&](const OutputBundle& bundle) {
        detail::require(!cfg.structural.empty(), "a structural.json is required (--structural)");
        const io::StructuralDocument doc = io::structural_from_json(io::read_json(cfg.structural));
        const auto dims = detail::resolve_dimensions(cfg, doc.simplex.N());
        std::vector<std::optional<FourierBasis>> bases(dims.size());
        parallel_for(dims.size(), cfg.jobs,
                     [&](std::size_t i) { bases[i] = fourier_basis(doc.simplex, dims[i], cfg.laplacian); });
        for (const auto& b : bases)
            detail::write_spectrum(bundle, *b, cfg.kernel_tolerance);
        return io::json::object();
    });
}

/// Step 6: canonical signals to Fourier coefficients.
inline void run_transform(const PipelineConfig& cfg)
{
    run_stage(cfg, "transform", [&](const OutputBundle& bundle) {
        detail::require(!cfg.signals.empty(), "a signals.json is required (--signals)");
        const io::json doc = io::read_json(cfg.signals);
        std::vector<HighOrderSignal> fourier;
        for (const auto& s : io::signals_from_document(doc)) {
            const FourierBasis basis = detail::load_basis(cfg.spectrum_dir, s.dimension());
            fourier.push_back(to_fourier(s, basis));
            io::fourier_signal_csv(fourier.back(), basis)
                .save(bundle / ("fourier/" + detail::signal_stem(s.measure(), s.dimension()) + ".csv"));
        }
        io::write_json(bundle / "fourier_signals.json",
                       io::signals_document(fourier, doc.value("variable_names", std::vector<std::string>{})));
        return io::json::object();
    });
}

/// Explained-variance reports for every signal of a signals document.
inline void run_cev(const PipelineConfig& cfg)
{
    run_stage(cfg, "cev", [&](const OutputBundle& bundle) {
        detail::require(!cfg.signals.empty(), "a signals.json is required (--signals)");
        io::json reports = io::json::array();
        io::CsvTable table({"measure", "dimension", "basis", "threshold", "components"});
        for (const auto& s : io::signals_from_document(io::read_json(cfg.signals))) {
            const std::string stem = to_string(s.basis().kind) + "_" + detail::signal_stem(s.measure(), s.dimension());
            io::json entry{{"measure", to_string(s.measure())},
                           {"dimension", s.dimension()},
                           {"basis", to_string(s.basis().kind)}};
            const auto outcome = detail::try_cev(s);
            if (outcome.report) {
                io::cev_csv(*outcome.report).save(bundle / ("cev/" + stem + ".csv"));
                entry["report"] = io::to_json(*outcome.report);
                for (const auto& [threshold, k] : outcome.report->components_at)
                    table.row(to_string(s.measure()), s.dimension(), to_string(s.basis().kind),
                              io::threshold_label(threshold), k);
            } else {
                std::cerr << "warning: " << stem << ": " << outcome.error << "\n";
                entry["error"] = outcome.error;
            }
            reports.push_back(std::move(entry));
        }
        io::write_json(bundle / "cev.json", io::json{{"reports", std::move(reports)}});
        table.save(bundle / "components_at.csv");
        return io::json::object();
    });
}

/// Full six-step pipeline over one input file.
inline void run_pipeline(const PipelineConfig& cfg)
{
    run_stage(cfg, "run", [&](const OutputBundle& bundle) {
        const io::EstimatedModel model = detail::estimate_model(cfg);
        io::write_json(bundle / "distribution.json", io::to_json(model));

        const io::StructuralDocument doc = detail::build_structural(cfg, model);
        io::write_json(bundle / "structural.json", io::to_json(doc));
        const int N = doc.simplex.N();
        const auto dims = detail::resolve_dimensions(cfg, N);
        const auto oracle = model.oracle();

        struct DimensionResult {
            std::optional<FourierBasis> basis;
            std::vector<HighOrderSignal> canonical;
            std::vector<HighOrderSignal> fourier;
        };
        std::vector<DimensionResult> results(dims.size());
        parallel_for(dims.size(), cfg.jobs, [&](std::size_t i) {
            auto& r = results[i];
            r.basis = fourier_basis(doc.simplex, dims[i], cfg.laplacian);
            for (MeasureKind m : cfg.measures) {
                r.canonical.push_back(build_signal(*oracle, doc.simplex, dims[i], m));
                r.fourier.push_back(to_fourier(r.canonical.back(), *r.basis));
            }
        });

        std::vector<HighOrderSignal> all_canonical, all_fourier;
        io::CsvTable table({"measure", "dimension", "basis", "threshold", "components"});
        io::json report = io::json::array();
        for (const auto& r : results) {
            detail::write_spectrum(bundle, *r.basis, cfg.kernel_tolerance);
            for (std::size_t m = 0; m < r.canonical.size(); ++m) {
                for (const HighOrderSignal* s : {&r.canonical[m], &r.fourier[m]}) {
                    const std::string basis_name = to_string(s->basis().kind);
                    const std::string stem = detail::signal_stem(s->measure(), s->dimension());
                    if (s->basis().kind == BasisKind::canonical)
                        io::canonical_signal_csv(*s).save(bundle / ("signals/" + stem + ".csv"));
                    else
                        io::fourier_signal_csv(*s, *r.basis).save(bundle / ("fourier/" + stem + ".csv"));
                    io::json entry{{"measure", to_string(s->measure())},
                                   {"dimension", s->dimension()},
                                   {"basis", basis_name}};
                    const auto outcome = detail::try_cev(*s);
                    if (outcome.report) {
                        io::cev_csv(*outcome.report).save(bundle / ("cev/" + basis_name + "_" + stem + ".csv"));
                        entry["components_at"] = io::to_json(*outcome.report)["components_at"];
                        for (const auto& [threshold, k] : outcome.report->components_at)
                            table.row(to_string(s->measure()), s->dimension(), basis_name,
                                      io::threshold_label(threshold), k);
                    } else {
                        std::cerr << "warning: " << basis_name << " " << stem << ": " << outcome.error << "\n";
                        entry["error"] = outcome.error;
                    }
                    report.push_back(std::move(entry));
                }
                all_canonical.push_back(r.canonical[m]);
                all_fourier.push_back(r.fourier[m]);
            }
        }
        io::write_json(bundle / "signals.json", io::signals_document(all_canonical, model.variable_names));
        io::write_json(bundle / "fourier_signals.json", io::signals_document(all_fourier, model.variable_names));
        table.save(bundle / "components_at.csv");
        io::write_json(bundle / "report.json", io::json{{"N", N}, {"dimensions", dims}, {"signals", std::move(report)}});
        return io::json::object();
    });
}

/// Fourier CEV against random bases for every canonical signal.
inline void run_control_random(const PipelineConfig& cfg)
{
    run_stage(cfg, "control-random", [&](const OutputBundle& bundle) {
        std::vector<HighOrderSignal> signals;
        std::vector<FourierBasis> bases;
        if (!cfg.signals.empty()) {
            for (const auto& s : io::signals_from_document(io::read_json(cfg.signals))) {
                detail::require(s.basis().kind == BasisKind::canonical, "control-random needs canonical signals");
                bases.push_back(detail::load_basis(cfg.spectrum_dir, s.dimension()));
                signals.push_back(s);
            }
        } else {
            const io::EstimatedModel model = detail::estimate_model(cfg);
            const io::StructuralDocument doc = detail::build_structural(cfg, model);
            const auto oracle = model.oracle();
            for (int n : detail::resolve_dimensions(cfg, doc.simplex.N())) {
                const FourierBasis basis = fourier_basis(doc.simplex, n, cfg.laplacian);
                for (MeasureKind m : cfg.measures) {
                    signals.push_back(build_signal(*oracle, doc.simplex, n, m));
                    bases.push_back(basis);
                }
            }
        }

        io::CsvTable curves({"measure", "dimension", "basis_kind", "replicate", "k", "cev"});
        io::CsvTable summary({"measure", "dimension", "k", "fourier_cev", "random_mean", "ci_low", "ci_high"});
        io::json skipped = io::json::array();
        for (std::size_t i = 0; i < signals.size(); ++i) {
            const auto& s = signals[i];
            const std::string m = to_string(s.measure());
            ControlComparison cc;
            try {
                cc = control_comparison(s, bases[i], cfg.random_bases,
                                        derive_seed(cfg.seed, static_cast<std::uint64_t>(s.dimension()),
                                                    static_cast<std::uint64_t>(s.measure())),
                                        cfg.random_inner, cfg.jobs);
            } catch (const NumericalError& e) {
                std::cerr << "warning: " << m << " n=" << s.dimension() << ": " << e.what() << "\n";
                skipped.push_back({{"measure", m}, {"dimension", s.dimension()}, {"error", e.what()}});
                continue;
            }
            for (Eigen::Index k = 0; k < cc.fourier_cev.size(); ++k)
                curves.row(m, s.dimension(), "fourier", 0, static_cast<long long>(k + 1), cc.fourier_cev(k));
            for (std::size_t r = 0; r < cc.random_cev.size(); ++r)
                for (Eigen::Index k = 0; k < cc.random_cev[r].size(); ++k)
                    curves.row(m, s.dimension(), "random", static_cast<long long>(r), static_cast<long long>(k + 1),
                               cc.random_cev[r](k));
            for (Eigen::Index k = 0; k < cc.fourier_cev.size(); ++k)
                summary.row(m, s.dimension(), static_cast<long long>(k + 1), cc.fourier_cev(k),
                            cc.random_band.mean(k), cc.random_band.low(k), cc.random_band.high(k));
        }
        curves.save(bundle / "control_random.csv");
        summary.save(bundle / "control_random_summary.csv");
        return io::json{{"interval_axis", "random basis draws"}, {"skipped", std::move(skipped)}};
    });
}

/// Rank-controlled synthetic experiment.
inline void run_control_synth(const PipelineConfig& cfg)
{
    run_stage(cfg, "control-synth", [&](const OutputBundle& bundle) {
        RankExperimentConfig ex;
        ex.ranks = cfg.ranks;
        ex.replicates = cfg.replicates;
        ex.samples = cfg.samples;
        ex.base_seed = cfg.seed;
        ex.size = cfg.size;
        ex.dimensions = cfg.dimensions.empty() ? std::vector<int>{2, 3, 4, 5} : cfg.dimensions;
        ex.measures = cfg.measures;
        ex.aggregator = cfg.aggregator;
        ex.weight_floor = cfg.weight_floor;
        ex.laplacian_form = cfg.laplacian;
        ex.random_bases = cfg.synth_random_bases;
        ex.random_inner = cfg.random_inner;
        ex.jobs = cfg.jobs;
        const RankExperimentResult result = rank_experiment(ex);

        const std::vector<std::string> header{"rank", "dimension", "measure", "k", "mean_cev", "ci_low", "ci_high"};
        io::CsvTable fourier(header);
        io::CsvTable random(header);
        io::json undefined = io::json::array();
        for (const auto& c : result.curves) {
            if (c.undefined > 0)
                undefined.push_back({{"rank", c.rank}, {"dimension", c.dimension},
                                     {"measure", to_string(c.measure)}, {"replicates", c.undefined}});
            for (Eigen::Index k = 0; k < c.fourier_band.mean.size(); ++k)
                fourier.row(c.rank, c.dimension, to_string(c.measure), static_cast<long long>(k + 1),
                            c.fourier_band.mean(k), c.fourier_band.low(k), c.fourier_band.high(k));
            for (Eigen::Index k = 0; k < c.random_band.mean.size(); ++k)
                random.row(c.rank, c.dimension, to_string(c.measure), static_cast<long long>(k + 1),
                           c.random_band.mean(k), c.random_band.low(k), c.random_band.high(k));
        }
        fourier.save(bundle / "control_synth.csv");
        if (cfg.synth_random_bases > 0)
            random.save(bundle / "control_synth_random.csv");

        io::json seeds = io::json::array();
        for (const auto& s : result.seeds)
            seeds.push_back({{"rank", s.rank}, {"replicate", s.replicate}, {"covariance", s.covariance},
                             {"sample", s.sample}, {"random", s.random}});
        io::json regularized = io::json::object();
        for (const auto& [rank, count] : result.regularized_subsets)
            regularized[std::to_string(rank)] = count;
        return io::json{{"similarity", "mutual information of the Gaussian copula model"},
                        {"interval_axis", "replicates"},
                        {"replicate_seeds", std::move(seeds)},
                        {"regularized_subsets", std::move(regularized)},
                        {"undefined_signals", std::move(undefined)}};
    });
}

}  // namespace hyperharmonic
