/**
 * Joint probability distributions over finite alphabets and Gaussian copula
 * models of continuous data.
 *
 * Discrete distributions are stored sparsely: only outcomes with strictly
 * positive mass are kept, which also gives the 0 log 0 = 0 convention for
 * free when computing entropies.
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "hyperharmonic/errors.hpp"
#include "hyperharmonic/units.hpp"

namespace hyperharmonic {

/// Sorted, duplicate-free list of variable indices.
using VariableSet = std::vector<int>;
/// One joint realisation, one symbol per variable.
using Outcome = std::vector<int>;

namespace detail {

inline void validate_subset(const VariableSet& subset, int num_variables)
{
    require(!subset.empty(), "variable subset must not be empty");
    std::vector<bool> seen(static_cast<std::size_t>(std::max(num_variables, 0)));
    for (int index : subset) {
        require(index >= 0 && index < num_variables,
                "variable index " + std::to_string(index) + " out of range [0, " + std::to_string(num_variables) +
                    ")");
        require(!seen[static_cast<std::size_t>(index)], "variable " + std::to_string(index) + " listed twice");
        seen[static_cast<std::size_t>(index)] = true;
    }
}

inline std::vector<std::string> default_names(std::size_t count)
{
    std::vector<std::string> names(count);
    for (std::size_t i = 0; i < count; ++i)
        names[i] = "X" + std::to_string(i);
    return names;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tables of samples
// ---------------------------------------------------------------------------

/// N+1 equally long columns of non-negative integer symbols.
class DiscreteSeriesTable {
public:
    /// Alphabet sizes default to (max symbol + 1) per column when left empty.
    DiscreteSeriesTable(std::vector<std::vector<int>> columns, std::vector<int> alphabet_sizes = {},
                        std::vector<std::string> variable_names = {})
        : columns_(std::move(columns)),
          alphabet_sizes_(std::move(alphabet_sizes)),
          names_(std::move(variable_names))
    {
        detail::require(!columns_.empty(), "table must contain at least one column");
        const std::size_t length = columns_.front().size();
        detail::require(length >= 1, "table must contain at least one sample");
        for (const auto& column : columns_)
            detail::require(column.size() == length, "all columns must have the same length");

        if (alphabet_sizes_.empty()) {
            for (const auto& column : columns_) {
                const int max_symbol = *std::max_element(column.begin(), column.end());
                alphabet_sizes_.push_back(std::max(max_symbol, 0) + 1);
            }
        }
        detail::require(alphabet_sizes_.size() == columns_.size(),
                        "one alphabet size per column is required");
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            detail::require(alphabet_sizes_[i] >= 1, "alphabet sizes must be positive");
            for (std::size_t t = 0; t < length; ++t) {
                const int symbol = columns_[i][t];
                detail::require(symbol >= 0 && symbol < alphabet_sizes_[i],
                                "symbol " + std::to_string(symbol) + " in column " +
                                    std::to_string(i) + ", sample " + std::to_string(t) +
                                    " is outside the alphabet {0, ..., " +
                                    std::to_string(alphabet_sizes_[i] - 1) + "}");
            }
        }
        if (names_.empty())
            names_ = detail::default_names(columns_.size());
        detail::require(names_.size() == columns_.size(), "one variable name per column is required");
    }

    int num_variables() const { return static_cast<int>(columns_.size()); }
    std::size_t length() const { return columns_.front().size(); }
    const std::vector<std::vector<int>>& columns() const { return columns_; }
    const std::vector<int>& alphabet_sizes() const { return alphabet_sizes_; }
    const std::vector<std::string>& variable_names() const { return names_; }

private:
    std::vector<std::vector<int>> columns_;
    std::vector<int> alphabet_sizes_;
    std::vector<std::string> names_;
};

/// N+1 equally long columns of finite reals.
class ContinuousSeriesTable {
public:
    ContinuousSeriesTable(std::vector<std::vector<double>> columns,
                          std::vector<std::string> variable_names = {})
        : columns_(std::move(columns)), names_(std::move(variable_names))
    {
        detail::require(!columns_.empty(), "table must contain at least one column");
        const std::size_t length = columns_.front().size();
        detail::require(length >= 1, "table must contain at least one sample");
        for (const auto& column : columns_) {
            detail::require(column.size() == length, "all columns must have the same length");
            for (double value : column)
                detail::require(std::isfinite(value), "continuous table contains a non-finite value");
        }
        if (names_.empty())
            names_ = detail::default_names(columns_.size());
        detail::require(names_.size() == columns_.size(), "one variable name per column is required");
    }

    int num_variables() const { return static_cast<int>(columns_.size()); }
    std::size_t length() const { return columns_.front().size(); }
    const std::vector<std::vector<double>>& columns() const { return columns_; }
    const std::vector<std::string>& variable_names() const { return names_; }

private:
    std::vector<std::vector<double>> columns_;
    std::vector<std::string> names_;
};

// ---------------------------------------------------------------------------
// Discrete joint distribution
// ---------------------------------------------------------------------------

class JointDistribution {
public:
    using MassMap = std::map<Outcome, double>;

    static constexpr double kMassTolerance = 1e-12;

    /// Takes an already normalised mass map. Zero entries are dropped.
    JointDistribution(std::vector<int> alphabet_sizes, MassMap mass)
        : alphabet_sizes_(std::move(alphabet_sizes))
    {
        detail::require(!alphabet_sizes_.empty(), "distribution needs at least one variable");
        for (int size : alphabet_sizes_)
            detail::require(size >= 1, "alphabet sizes must be positive");
        double total = 0.0;
        for (auto& [outcome, p] : mass) {
            detail::require(outcome.size() == alphabet_sizes_.size(),
                            "outcome arity does not match the number of variables");
            for (std::size_t i = 0; i < outcome.size(); ++i)
                detail::require(outcome[i] >= 0 && outcome[i] < alphabet_sizes_[i],
                                "outcome symbol outside its alphabet");
            detail::require(std::isfinite(p) && p >= 0.0, "probabilities must be finite and non-negative");
            if (p > 0.0) {
                total += p;
                mass_.emplace(outcome, p);
            }
        }
        detail::require(std::abs(total - 1.0) <= kMassTolerance,
                        "total probability mass must equal 1 (got " + std::to_string(total) + ")");
    }

    /// Normalises arbitrary non-negative weights into a distribution.
    static JointDistribution from_weights(std::vector<int> alphabet_sizes, const MassMap& weights)
    {
        double total = 0.0;
        for (const auto& [outcome, w] : weights) {
            detail::require(std::isfinite(w) && w >= 0.0, "weights must be finite and non-negative");
            total += w;
        }
        detail::require(total > 0.0, "weights must have positive total");
        MassMap normalised;
        for (const auto& [outcome, w] : weights)
            if (w > 0.0)
                normalised.emplace(outcome, w / total);
        return JointDistribution(std::move(alphabet_sizes), std::move(normalised));
    }

    int num_variables() const { return static_cast<int>(alphabet_sizes_.size()); }
    const std::vector<int>& alphabet_sizes() const { return alphabet_sizes_; }
    const MassMap& mass() const { return mass_; }
    std::size_t support_size() const { return mass_.size(); }

    double probability(const Outcome& outcome) const
    {
        auto it = mass_.find(outcome);
        return it == mass_.end() ? 0.0 : it->second;
    }

    double total_mass() const
    {
        double total = 0.0;
        for (const auto& entry : mass_)
            total += entry.second;
        return total;
    }

private:
    std::vector<int> alphabet_sizes_;
    MassMap mass_;
};

/// Empirical frequencies of the observed joint outcomes.
///
/// With `smoothing` > 0, adds that pseudo-count to every tuple of the full
/// product alphabet (additive smoothing); the default is no smoothing.
inline JointDistribution estimate_empirical(const DiscreteSeriesTable& table, double smoothing = 0.0)
{
    detail::require(smoothing >= 0.0 && std::isfinite(smoothing), "smoothing must be non-negative");
    const int vars = table.num_variables();
    const std::size_t length = table.length();

    JointDistribution::MassMap counts;
    Outcome outcome(vars);
    for (std::size_t t = 0; t < length; ++t) {
        for (int i = 0; i < vars; ++i)
            outcome[i] = table.columns()[i][t];
        counts[outcome] += 1.0;
    }

    if (smoothing > 0.0) {
        double cells = 1.0;
        for (int size : table.alphabet_sizes())
            cells *= size;
        if (cells > static_cast<double>(1u << 24))
            throw CapacityError("additive smoothing over more than 2^24 joint outcomes is not supported");
        std::fill(outcome.begin(), outcome.end(), 0);
        for (;;) {
            counts[outcome] += smoothing;
            int i = vars - 1;
            while (i >= 0 && ++outcome[i] == table.alphabet_sizes()[i])
                outcome[i--] = 0;
            if (i < 0)
                break;
        }
    }
    return JointDistribution::from_weights(table.alphabet_sizes(), counts);
}

inline JointDistribution marginalize(const JointDistribution& dist, const VariableSet& subset)
{
    detail::validate_subset(subset, dist.num_variables());
    std::vector<int> sizes;
    sizes.reserve(subset.size());
    for (int index : subset)
        sizes.push_back(dist.alphabet_sizes()[index]);

    JointDistribution::MassMap marginal;
    Outcome projected(subset.size());
    for (const auto& [outcome, p] : dist.mass()) {
        for (std::size_t k = 0; k < subset.size(); ++k)
            projected[k] = outcome[subset[k]];
        marginal[projected] += p;
    }
    return JointDistribution(std::move(sizes), std::move(marginal));
}

/// Shannon entropy in the active unit (bits by default).
inline double entropy(const JointDistribution& dist)
{
    double h = 0.0;
    for (const auto& entry : dist.mass())
        h -= entry.second * info_log(entry.second);
    return h == 0.0 ? 0.0 : h;
}

// ---------------------------------------------------------------------------
// Gaussian copula model
// ---------------------------------------------------------------------------

class GaussianModel {
public:
    explicit GaussianModel(Eigen::MatrixXd correlation) : correlation_(std::move(correlation))
    {
        detail::require(correlation_.rows() >= 1 && correlation_.rows() == correlation_.cols(),
                        "correlation matrix must be square and non-empty");
        detail::require(correlation_.allFinite(), "correlation matrix must be finite");
        detail::require((correlation_ - correlation_.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
                        "correlation matrix must be symmetric");
        for (Eigen::Index i = 0; i < correlation_.rows(); ++i)
            detail::require(std::abs(correlation_(i, i) - 1.0) <= 1e-12,
                            "correlation matrix must have unit diagonal");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(correlation_, Eigen::EigenvaluesOnly);
        detail::require(solver.eigenvalues().minCoeff() >= -1e-10,
                        "correlation matrix must be positive semidefinite");
    }

    int num_variables() const { return static_cast<int>(correlation_.rows()); }
    const Eigen::MatrixXd& correlation_matrix() const { return correlation_; }

private:
    Eigen::MatrixXd correlation_;
};

namespace detail {

/// Ranks 1..T with ties receiving the average of the ranks they span.
inline std::vector<double> average_ranks(const std::vector<double>& values)
{
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]])
            ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

inline Eigen::MatrixXd symmetrize_unit_diagonal(Eigen::MatrixXd m)
{
    m = 0.5 * (m + m.transpose()).eval();
    m.diagonal().setOnes();
    return m;
}

}  // namespace detail

/// Gaussian copula transform of one column: rank r -> Phi^{-1}(r / (T + 1)).
inline std::vector<double> copula_normal_scores(const std::vector<double>& column)
{
    const boost::math::normal standard;
    const double denominator = static_cast<double>(column.size()) + 1.0;
    std::vector<double> scores = detail::average_ranks(column);
    for (double& s : scores)
        s = boost::math::quantile(standard, s / denominator);
    return scores;
}

inline GaussianModel copula_gaussian_fit(const ContinuousSeriesTable& table)
{
    const std::size_t length = table.length();
    detail::require(length >= 3, "Gaussian copula fit needs at least 3 samples");
    const int vars = table.num_variables();

    Eigen::MatrixXd scores(static_cast<Eigen::Index>(length), vars);
    for (int i = 0; i < vars; ++i) {
        const auto& column = table.columns()[i];
        const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
        if (*lo == *hi)
            throw NumericalError("column '" + table.variable_names()[i] +
                                 "' is constant; its rank transform is undefined");
        const std::vector<double> z = copula_normal_scores(column);
        for (std::size_t t = 0; t < length; ++t)
            scores(static_cast<Eigen::Index>(t), i) = z[t];
    }

    const Eigen::RowVectorXd mean = scores.colwise().mean();
    scores.rowwise() -= mean;
    const Eigen::MatrixXd covariance = scores.transpose() * scores;
    const Eigen::VectorXd scale = covariance.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd correlation = scale.asDiagonal() * covariance * scale.asDiagonal();
    return GaussianModel(detail::symmetrize_unit_diagonal(std::move(correlation)));
}

struct GaussianEntropy {
    double value = 0.0;
    /// True when the raw principal submatrix was not numerically positive
    /// definite and only the diagonal ridge made the determinant usable.
    bool regularized = false;
};

/// Ridge added to the diagonal of every principal submatrix before factorising.
inline constexpr double kGaussianRidge = 1e-12;

inline GaussianEntropy gaussian_subset_entropy_detailed(const GaussianModel& model, const VariableSet& subset)
{
    detail::validate_subset(subset, model.num_variables());
    const auto k = static_cast<Eigen::Index>(subset.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            sub(a, b) = model.correlation_matrix()(subset[a], subset[b]);

    GaussianEntropy result;
    result.regularized = Eigen::LLT<Eigen::MatrixXd>(sub).info() != Eigen::Success;

    sub.diagonal().array() += kGaussianRidge;
    const Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success)
        throw NumericalError("correlation submatrix is not positive definite after regularization");
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    if (!std::isfinite(log_det))
        throw NumericalError("correlation submatrix has a non-finite log-determinant");

    const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
    const double unit = log_base() == LogBase::bits ? std::numbers::ln2 : 1.0;
    result.value = 0.5 * (static_cast<double>(k) * std::log(two_pi_e) + log_det) / unit;
    return result;
}

/// Differential entropy of a subset of a standardised Gaussian model.
inline double gaussian_subset_entropy(const GaussianModel& model, const VariableSet& subset)
{
    return gaussian_subset_entropy_detailed(model, subset).value;
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return fields;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

template <typename T, typename Parse>
std::pair<std::vector<std::string>, std::vector<std::vector<T>>> read_csv_columns(std::istream& in,
                                                                                  Parse parse)
{
    std::string line;
    std::size_t line_number = 0;
    std::vector<std::string> names;
    while (std::getline(in, line)) {
        ++line_number;
        if (!trim(line).empty())
            break;
    }
    if (trim(line).empty())
        throw ValidationError("CSV input is empty (missing header row)");
    for (std::string_view field : split_csv_line(line))
        names.emplace_back(trim(field));

    std::vector<std::vector<T>> columns(names.size());
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != names.size())
            throw ValidationError("line " + std::to_string(line_number) + ": expected " +
                                  std::to_string(names.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string_view field = trim(fields[i]);
            T value{};
            if (!parse(field, value))
                throw ValidationError("line " + std::to_string(line_number) + ", column '" + names[i] +
                                      "': cannot parse '" + std::string(field) + "'");
            columns[i].push_back(value);
        }
    }
    if (columns.empty() || columns.front().empty())
        throw ValidationError("CSV input contains no samples");
    return {std::move(names), std::move(columns)};
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open input file '" + path + "'");
    return in;
}

}  // namespace detail

/// Header row of names, then one sample per row of non-negative integers.
inline DiscreteSeriesTable read_discrete_csv(std::istream& in)
{
    auto [names, columns] = detail::read_csv_columns<int>(in, [](std::string_view s, int& out) {
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && ptr == s.data() + s.size() && !s.empty() && out >= 0;
    });
    return DiscreteSeriesTable(std::move(columns), {}, std::move(names));
}

inline ContinuousSeriesTable read_continuous_csv(std::istream& in)
{
    auto [names, columns] = detail::read_csv_columns<double>(in, [](std::string_view s, double& out) {
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && ptr == s.data() + s.size() && !s.empty() && std::isfinite(out);
    });
    return ContinuousSeriesTable(std::move(columns), std::move(names));
}

inline DiscreteSeriesTable read_discrete_csv(const std::string& path)
{
    auto in = detail::open_input(path);
    return read_discrete_csv(in);
}

inline ContinuousSeriesTable read_continuous_csv(const std::string& path)
{
    auto in = detail::open_input(path);
    return read_continuous_csv(in);
}

}  // namespace hyperharmonic
