/**
 * Boundary matrices and weighted structural simplices.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hyperharmonic/distribution.hpp"
#include "hyperharmonic/errors.hpp"
#include "hyperharmonic/infotheory.hpp"
#include "hyperharmonic/simplex.hpp"

namespace hyperharmonic {

/// Signed incidence matrix of the boundary map from n-chains to (n-1)-chains.
///
/// Rows index (n-1)-simplices and columns index n-simplices, both in
/// lexicographic order. The column of [v_0, ..., v_n] holds (-1)^i at the row
/// of the face that omits v_i. For n = 0 the map is zero and the matrix has a
/// single row.
struct BoundaryMatrix {
    struct Entry {
        Eigen::Index row;
        Eigen::Index col;
        int value;
    };

    int N = 0;
    int n = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::vector<Entry> entries;  // column-major order

    Eigen::SparseMatrix<double> to_sparse() const
    {
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(entries.size());
        for (const Entry& e : entries)
            triplets.emplace_back(e.row, e.col, static_cast<double>(e.value));
        Eigen::SparseMatrix<double> out(rows, cols);
        out.setFromTriplets(triplets.begin(), triplets.end());
        return out;
    }

    Eigen::MatrixXi to_dense() const
    {
        Eigen::MatrixXi out = Eigen::MatrixXi::Zero(rows, cols);
        for (const Entry& e : entries)
            out(e.row, e.col) = e.value;
        return out;
    }
};

inline BoundaryMatrix boundary_matrix(int N, int n)
{
    detail::validate_dimension(N, n);
    BoundaryMatrix b;
    b.N = N;
    b.n = n;
    b.cols = static_cast<Eigen::Index>(simplex_count(N, n));
    if (n == 0) {
        b.rows = 1;
        return b;
    }
    b.rows = static_cast<Eigen::Index>(simplex_count(N, n - 1));
    const std::vector<SimplexId> simplices = enumerate_simplices(N, n);
    b.entries.reserve(simplices.size() * static_cast<std::size_t>(n + 1));
    for (std::size_t col = 0; col < simplices.size(); ++col) {
        for (int i = 0; i <= n; ++i) {
            const auto row = static_cast<Eigen::Index>(simplex_rank(simplices[col].face(i), N));
            b.entries.push_back({row, static_cast<Eigen::Index>(col), (i % 2 == 0) ? 1 : -1});
        }
    }
    return b;
}

enum class WeightAggregator { mean, max, min };

inline std::string to_string(WeightAggregator a)
{
    switch (a) {
    case WeightAggregator::mean: return "mean";
    case WeightAggregator::max: return "max";
    case WeightAggregator::min: return "min";
    }
    return "unknown";
}

inline WeightAggregator parse_aggregator(const std::string& name)
{
    if (name == "mean") return WeightAggregator::mean;
    if (name == "max") return WeightAggregator::max;
    if (name == "min") return WeightAggregator::min;
    throw ValidationError("unknown weight aggregator '" + name + "'");
}

/// Default lower bound on edge and higher-simplex weights (in bits).
inline constexpr double kDefaultWeightFloor = 1e-9;

/// The standard N-simplex with one strictly positive weight per simplex.
class StructuralSimplex {
public:
    /// `weights[n]` holds w_n in canonical order, for n = 0, ..., N.
    StructuralSimplex(int N, std::vector<Eigen::VectorXd> weights) : N_(N), weights_(std::move(weights))
    {
        detail::require(N_ >= 0, "N must be non-negative");
        detail::require(weights_.size() == static_cast<std::size_t>(N_ + 1),
                        "structural simplex needs one weight vector per dimension 0..N");
        for (int n = 0; n <= N_; ++n) {
            const auto& w = weights_[n];
            detail::require(w.size() == static_cast<Eigen::Index>(simplex_count(N_, n)),
                            "weight vector for dimension " + std::to_string(n) + " has the wrong length");
            detail::require(w.allFinite() && (w.array() > 0.0).all(),
                            "all simplex weights must be finite and strictly positive");
        }
    }

    int N() const { return N_; }
    int num_vertices() const { return N_ + 1; }

    const Eigen::VectorXd& weights(int n) const
    {
        detail::validate_dimension(N_, n);
        return weights_[n];
    }

private:
    int N_;
    std::vector<Eigen::VectorXd> weights_;
};

/// Structural simplex from a pairwise similarity matrix.
///
/// Vertices get weight 1, an edge [i, j] gets max(m_ij, floor), and a higher
/// simplex gets max(aggregate of m over all its vertex pairs, floor).
inline StructuralSimplex structural_weights(const Eigen::MatrixXd& similarity,
                                            WeightAggregator aggregator = WeightAggregator::mean,
                                            double floor = kDefaultWeightFloor, int max_N = kDefaultMaxN)
{
    detail::require(similarity.rows() >= 1 && similarity.rows() == similarity.cols(),
                    "similarity matrix must be square and non-empty");
    detail::require(std::isfinite(floor) && floor > 0.0, "weight floor must be positive");
    const int N = static_cast<int>(similarity.rows()) - 1;
    if (N > max_N)
        throw CapacityError("N = " + std::to_string(N) + " exceeds the configured maximum " +
                            std::to_string(max_N));
    for (int i = 0; i <= N; ++i)
        for (int j = i + 1; j <= N; ++j) {
            const double a = similarity(i, j);
            detail::require(std::isfinite(a) && std::abs(a - similarity(j, i)) <= 1e-12,
                            "similarity matrix must be finite and symmetric");
            detail::require(a >= 0.0, "similarity matrix entries must be non-negative");
        }

    std::vector<Eigen::VectorXd> weights;
    weights.push_back(Eigen::VectorXd::Ones(N + 1));
    for (int n = 1; n <= N; ++n) {
        const std::vector<SimplexId> simplices = enumerate_simplices(N, n);
        Eigen::VectorXd w(static_cast<Eigen::Index>(simplices.size()));
        for (std::size_t k = 0; k < simplices.size(); ++k) {
            const auto& v = simplices[k].vertices();
            double sum = 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            int pairs = 0;
            for (std::size_t a = 0; a < v.size(); ++a)
                for (std::size_t b = a + 1; b < v.size(); ++b) {
                    const double m = similarity(v[a], v[b]);
                    sum += m;
                    lo = std::min(lo, m);
                    hi = std::max(hi, m);
                    ++pairs;
                }
            double value = 0.0;
            switch (aggregator) {
            case WeightAggregator::mean: value = sum / pairs; break;
            case WeightAggregator::max: value = hi; break;
            case WeightAggregator::min: value = lo; break;
            }
            w(static_cast<Eigen::Index>(k)) = std::max(value, floor);
        }
        weights.push_back(std::move(w));
    }
    return StructuralSimplex(N, std::move(weights));
}

enum class SimilarityMetric { mutual_information, abs_pearson, total_variation };

inline std::string to_string(SimilarityMetric m)
{
    switch (m) {
    case SimilarityMetric::mutual_information: return "mutual_information";
    case SimilarityMetric::abs_pearson: return "abs_pearson";
    case SimilarityMetric::total_variation: return "total_variation";
    }
    return "unknown";
}

inline SimilarityMetric parse_similarity_metric(const std::string& name)
{
    if (name == "mutual_information" || name == "mi") return SimilarityMetric::mutual_information;
    if (name == "abs_pearson" || name == "pearson") return SimilarityMetric::abs_pearson;
    if (name == "total_variation" || name == "tv") return SimilarityMetric::total_variation;
    throw ValidationError("unknown similarity metric '" + name + "'");
}

namespace detail {

inline double abs_pearson(const JointDistribution& dist, int i, int j)
{
    double mean_i = 0.0, mean_j = 0.0;
    for (const auto& [x, p] : dist.mass()) {
        mean_i += p * x[i];
        mean_j += p * x[j];
    }
    double var_i = 0.0, var_j = 0.0, cov = 0.0;
    for (const auto& [x, p] : dist.mass()) {
        const double di = x[i] - mean_i;
        const double dj = x[j] - mean_j;
        var_i += p * di * di;
        var_j += p * dj * dj;
        cov += p * di * dj;
    }
    if (var_i <= 1e-300 || var_j <= 1e-300)
        throw NumericalError("Pearson correlation undefined: variable " +
                             std::to_string(var_i <= 1e-300 ? i : j) + " is constant");
    return std::min(1.0, std::abs(cov / std::sqrt(var_i * var_j)));
}

/// Total variation distance between p(x_i, x_j) and p(x_i) p(x_j).
inline double total_variation(const JointDistribution& dist, int i, int j)
{
    const JointDistribution pair = marginalize(dist, {std::min(i, j), std::max(i, j)});
    const JointDistribution first = marginalize(pair, {0});
    const JointDistribution second = marginalize(pair, {1});
    double sum = 0.0;
    for (int a = 0; a < pair.alphabet_sizes()[0]; ++a) {
        const double pa = first.probability({a});
        for (int b = 0; b < pair.alphabet_sizes()[1]; ++b)
            sum += std::abs(pair.probability({a, b}) - pa * second.probability({b}));
    }
    return 0.5 * sum;
}

}  // namespace detail

/// Pairwise similarity of the variables of a discrete distribution. The
/// diagonal is left at zero.
inline Eigen::MatrixXd similarity_matrix(const JointDistribution& dist, SimilarityMetric metric)
{
    if (metric == SimilarityMetric::mutual_information)
        return mutual_information_matrix(DiscreteEntropyOracle(dist));
    const int vars = dist.num_variables();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(vars, vars);
    for (int i = 0; i < vars; ++i)
        for (int j = i + 1; j < vars; ++j)
            out(i, j) = out(j, i) = metric == SimilarityMetric::abs_pearson ? detail::abs_pearson(dist, i, j)
                                                                            : detail::total_variation(dist, i, j);
    return out;
}

inline Eigen::MatrixXd similarity_matrix(const GaussianModel& model, SimilarityMetric metric)
{
    switch (metric) {
    case SimilarityMetric::mutual_information:
        return mutual_information_matrix(GaussianEntropyOracle(model));
    case SimilarityMetric::abs_pearson: {
        Eigen::MatrixXd out = model.correlation_matrix().cwiseAbs();
        out.diagonal().setZero();
        return out;
    }
    case SimilarityMetric::total_variation:
        break;
    }
    throw ValidationError("total variation similarity needs a discrete distribution");
}

}  // namespace hyperharmonic
