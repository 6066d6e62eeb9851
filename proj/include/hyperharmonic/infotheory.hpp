/**
 * Scalar information measures built on a subset-entropy oracle.
 *
 * Every measure is expressed through joint entropies H(X^gamma) of variable
 * subsets gamma, so the same code serves discrete distributions (entropies by
 * marginalisation) and Gaussian copula models (closed-form entropies).
 */
#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "hyperharmonic/distribution.hpp"
#include "hyperharmonic/errors.hpp"
#include "hyperharmonic/simplex.hpp"
#include "hyperharmonic/units.hpp"

namespace hyperharmonic {

/// Values within this distance below zero are rounding noise for
/// non-negative measures and are clamped to zero.
inline constexpr double kClampTolerance = 1e-10;

/// Bitmask form of a variable subset; bit i set means variable i is included.
using SubsetMask = std::uint64_t;

inline SubsetMask to_mask(const VariableSet& subset)
{
    SubsetMask mask = 0;
    for (int i : subset)
        mask |= SubsetMask{1} << i;
    return mask;
}

inline VariableSet from_mask(SubsetMask mask)
{
    VariableSet out;
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

/// Memoised map from variable subsets to joint entropies.
///
/// Lookups are safe from several threads at once; the cache holds at most one
/// entry per subset (2^(N+1) in total).
class EntropyOracle {
public:
    explicit EntropyOracle(int num_variables) : num_variables_(num_variables)
    {
        detail::require(num_variables >= 1, "oracle needs at least one variable");
        if (num_variables > 62)
            throw CapacityError("entropy oracle supports at most 62 variables");
    }
    virtual ~EntropyOracle() = default;
    EntropyOracle(const EntropyOracle&) = delete;
    EntropyOracle& operator=(const EntropyOracle&) = delete;

    int num_variables() const { return num_variables_; }

    double entropy(const VariableSet& subset) const
    {
        if (subset.empty())
            return 0.0;
        detail::validate_subset(subset, num_variables_);
        return entropy(to_mask(subset));
    }

    double entropy(SubsetMask mask) const
    {
        if (mask == 0)
            return 0.0;
        detail::require(mask >> num_variables_ == 0, "subset mask references unknown variables");
        // The unit is part of the key so switching bits/nats never serves stale values.
        const SubsetMask key = mask | (log_base() == LogBase::nats ? SubsetMask{1} << 63 : 0);
        {
            std::shared_lock lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end())
                return it->second;
        }
        const double value = compute_entropy(from_mask(mask));
        std::unique_lock lock(mutex_);
        cache_.emplace(key, value);
        return value;
    }

    std::size_t cache_size() const
    {
        std::shared_lock lock(mutex_);
        return cache_.size();
    }

protected:
    virtual double compute_entropy(const VariableSet& subset) const = 0;

private:
    int num_variables_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<SubsetMask, double> cache_;
};

class DiscreteEntropyOracle final : public EntropyOracle {
public:
    explicit DiscreteEntropyOracle(JointDistribution dist)
        : EntropyOracle(dist.num_variables()), dist_(std::move(dist))
    {
    }

    const JointDistribution& distribution() const { return dist_; }

protected:
    double compute_entropy(const VariableSet& subset) const override
    {
        return hyperharmonic::entropy(marginalize(dist_, subset));
    }

private:
    JointDistribution dist_;
};

class GaussianEntropyOracle final : public EntropyOracle {
public:
    explicit GaussianEntropyOracle(GaussianModel model)
        : EntropyOracle(model.num_variables()), model_(std::move(model))
    {
    }

    const GaussianModel& model() const { return model_; }

    /// Subsets whose correlation submatrix needed the diagonal ridge.
    std::set<SubsetMask> regularized_subsets() const
    {
        std::lock_guard lock(flag_mutex_);
        return regularized_;
    }

protected:
    double compute_entropy(const VariableSet& subset) const override
    {
        const GaussianEntropy h = gaussian_subset_entropy_detailed(model_, subset);
        if (h.regularized) {
            std::lock_guard lock(flag_mutex_);
            regularized_.insert(to_mask(subset));
        }
        return h.value;
    }

private:
    GaussianModel model_;
    mutable std::mutex flag_mutex_;
    mutable std::set<SubsetMask> regularized_;
};

enum class MeasureKind { tc, dtc, o_information, s_information, interaction_information };

inline std::string to_string(MeasureKind kind)
{
    switch (kind) {
    case MeasureKind::tc: return "tc";
    case MeasureKind::dtc: return "dtc";
    case MeasureKind::o_information: return "o_information";
    case MeasureKind::s_information: return "s_information";
    case MeasureKind::interaction_information: return "interaction_information";
    }
    return "unknown";
}

inline MeasureKind parse_measure_kind(const std::string& name)
{
    if (name == "tc") return MeasureKind::tc;
    if (name == "dtc") return MeasureKind::dtc;
    if (name == "o_information" || name == "o" || name == "omega") return MeasureKind::o_information;
    if (name == "s_information" || name == "s" || name == "sigma") return MeasureKind::s_information;
    if (name == "interaction_information" || name == "ii") return MeasureKind::interaction_information;
    throw ValidationError("unknown measure kind '" + name + "'");
}

namespace detail {

inline double clamp_noise(double value)
{
    return (value < 0.0 && value >= -kClampTolerance) ? 0.0 : value;
}

inline void require_size(const VariableSet& subset, std::size_t minimum, const char* measure)
{
    require(subset.size() >= minimum, std::string(measure) + " needs at least " + std::to_string(minimum) +
                                          " variables, got " + std::to_string(subset.size()));
}

}  // namespace detail

inline double mutual_information(const EntropyOracle& oracle, int i, int j)
{
    detail::require(i != j, "mutual information needs two distinct variables");
    detail::require(i >= 0 && j >= 0 && i < oracle.num_variables() && j < oracle.num_variables(),
                    "variable index out of range");
    const SubsetMask a = SubsetMask{1} << i;
    const SubsetMask b = SubsetMask{1} << j;
    return detail::clamp_noise(oracle.entropy(a) + oracle.entropy(b) - oracle.entropy(a | b));
}

inline double total_correlation(const EntropyOracle& oracle, const VariableSet& subset)
{
    detail::require_size(subset, 2, "total correlation");
    detail::validate_subset(subset, oracle.num_variables());
    // Summing in mask order makes the result independent of how the subset is listed.
    double sum = 0.0;
    for (int i : from_mask(to_mask(subset)))
        sum += oracle.entropy(SubsetMask{1} << i);
    return detail::clamp_noise(sum - oracle.entropy(to_mask(subset)));
}

inline double dual_total_correlation(const EntropyOracle& oracle, const VariableSet& subset)
{
    detail::require_size(subset, 2, "dual total correlation");
    detail::validate_subset(subset, oracle.num_variables());
    const SubsetMask all = to_mask(subset);
    const double joint = oracle.entropy(all);
    double residual = 0.0;  // sum of H(X_i | rest)
    for (int i : from_mask(all))
        residual += joint - oracle.entropy(all & ~(SubsetMask{1} << i));
    return detail::clamp_noise(joint - residual);
}

/// TC - DTC. Negative means synergy-dominated, positive redundancy-dominated.
inline double o_information(const EntropyOracle& oracle, const VariableSet& subset)
{
    detail::require_size(subset, 3, "O-information");
    return total_correlation(oracle, subset) - dual_total_correlation(oracle, subset);
}

inline double s_information(const EntropyOracle& oracle, const VariableSet& subset)
{
    detail::require_size(subset, 2, "S-information");
    return total_correlation(oracle, subset) + dual_total_correlation(oracle, subset);
}

/// -sum over gamma subset of S of (-1)^|gamma| H(gamma), with H(empty) = 0.
inline double interaction_information(const EntropyOracle& oracle, const VariableSet& subset)
{
    detail::require_size(subset, 2, "interaction information");
    detail::validate_subset(subset, oracle.num_variables());
    const SubsetMask all = to_mask(subset);
    double sum = 0.0;
    // Walk every submask of `all`, including the empty set.
    for (SubsetMask gamma = all;; gamma = (gamma - 1) & all) {
        const double sign = (std::popcount(gamma) % 2 == 0) ? 1.0 : -1.0;
        sum += sign * oracle.entropy(gamma);
        if (gamma == 0)
            break;
    }
    return -sum;
}

inline double evaluate_measure(MeasureKind kind, const EntropyOracle& oracle, const VariableSet& subset)
{
    switch (kind) {
    case MeasureKind::tc: return total_correlation(oracle, subset);
    case MeasureKind::dtc: return dual_total_correlation(oracle, subset);
    case MeasureKind::o_information: return o_information(oracle, subset);
    case MeasureKind::s_information: return s_information(oracle, subset);
    case MeasureKind::interaction_information: return interaction_information(oracle, subset);
    }
    throw ValidationError("unknown measure kind");
}

/// The measure on every n-simplex of the standard N-simplex, in canonical order.
inline Eigen::VectorXd signal_sweep(const EntropyOracle& oracle, int N, int n, MeasureKind kind)
{
    detail::require(oracle.num_variables() == N + 1, "oracle must cover all N+1 variables");
    const std::size_t minimum = kind == MeasureKind::o_information ? 2 : 1;
    detail::require(n >= static_cast<int>(minimum) && n <= N,
                    "signal dimension " + std::to_string(n) + " invalid for " + to_string(kind) +
                        " on N = " + std::to_string(N));
    const std::vector<SimplexId> simplices = enumerate_simplices(N, n);
    Eigen::VectorXd out(static_cast<Eigen::Index>(simplices.size()));
    for (std::size_t k = 0; k < simplices.size(); ++k)
        out(static_cast<Eigen::Index>(k)) = evaluate_measure(kind, oracle, simplices[k].vertices());
    return out;
}

/// Symmetric matrix of pairwise mutual information with zero diagonal.
inline Eigen::MatrixXd mutual_information_matrix(const EntropyOracle& oracle)
{
    const int vars = oracle.num_variables();
    Eigen::MatrixXd mi = Eigen::MatrixXd::Zero(vars, vars);
    for (int i = 0; i < vars; ++i)
        for (int j = i + 1; j < vars; ++j)
            mi(i, j) = mi(j, i) = mutual_information(oracle, i, j);
    return mi;
}

}  // namespace hyperharmonic
