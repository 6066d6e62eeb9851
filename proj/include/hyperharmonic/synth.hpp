/**
 * Rank-controlled Gaussian data and the compressibility-versus-rank
 * experiment.
 *
 * A random covariance of rank r is built as follows: draw M with i.i.d.
 * standard-normal entries, form A = M M^T, take its singular value
 * decomposition A = V S V^T, zero the (size - r) smallest singular values and
 * reassemble C_r = V S_r V^T. Samples of N(0, C_r) are fed through the copula
 * estimator and the full signal pipeline, and CEV curves are averaged over
 * replicates.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "hyperharmonic/complex.hpp"
#include "hyperharmonic/distribution.hpp"
#include "hyperharmonic/infotheory.hpp"
#include "hyperharmonic/random.hpp"
#include "hyperharmonic/spectral.hpp"
#include "hyperharmonic/transform.hpp"

namespace hyperharmonic {

/// Count of eigenvalues above tolerance * largest eigenvalue.
inline int numerical_rank(const Eigen::MatrixXd& symmetric, double relative_tolerance = 1e-8)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd values = solver.eigenvalues();
    const double largest = values.cwiseAbs().maxCoeff();
    if (largest == 0.0)
        return 0;
    return static_cast<int>((values.array() > relative_tolerance * largest).count());
}

struct RankedCovariance {
    int size = 0;
    int rank = 0;
    Eigen::MatrixXd matrix;  ///< C_r
    Eigen::MatrixXd source;  ///< the untruncated A = M M^T
};

/// Draws whose result fails the numerical-rank check (an ill-conditioned A)
/// are redrawn from derived seeds, up to this many attempts.
inline constexpr int kCovarianceAttempts = 16;

inline RankedCovariance random_rank_covariance(int size, int rank, std::uint64_t seed)
{
    detail::require(size >= 1, "covariance size must be positive");
    detail::require(rank >= 1 && rank <= size,
                    "rank " + std::to_string(rank) + " outside [1, " + std::to_string(size) + "]");
    for (int attempt = 0; attempt < kCovarianceAttempts; ++attempt) {
        const std::uint64_t draw_seed = attempt == 0 ? seed : derive_seed(seed, 0xC0FF, attempt);
        const Eigen::MatrixXd m = standard_normal_matrix(size, size, draw_seed);
        RankedCovariance c;
        c.size = size;
        c.rank = rank;
        c.source = m * m.transpose();
        if (rank == size) {
            c.matrix = c.source;
        } else {
            // Singular values come out in decreasing order.
            const Eigen::JacobiSVD<Eigen::MatrixXd> svd(c.source, Eigen::ComputeFullU);
            Eigen::VectorXd truncated = svd.singularValues();
            truncated.tail(size - rank).setZero();
            const Eigen::MatrixXd& v = svd.matrixU();
            c.matrix = v * truncated.asDiagonal() * v.transpose();
            c.matrix = 0.5 * (c.matrix + c.matrix.transpose()).eval();
        }
        if (numerical_rank(c.matrix) == rank)
            return c;
    }
    throw NumericalError("could not generate a covariance of numerical rank " + std::to_string(rank));
}

/// T draws of N(0, C) through the eigenfactor C = (V L^{1/2})(V L^{1/2})^T.
inline ContinuousSeriesTable sample_gaussian(const RankedCovariance& c, std::size_t samples, std::uint64_t seed)
{
    detail::require(samples >= 1, "need at least one sample");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c.matrix);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigendecomposition of the covariance failed");
    const Eigen::MatrixXd factor =
        solver.eigenvectors() * solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    const Eigen::MatrixXd z = standard_normal_matrix(static_cast<Eigen::Index>(samples), c.size, seed);
    const Eigen::MatrixXd x = z * factor.transpose();

    std::vector<std::vector<double>> columns(static_cast<std::size_t>(c.size));
    for (int i = 0; i < c.size; ++i)
        columns[i].assign(x.col(i).data(), x.col(i).data() + x.rows());
    return ContinuousSeriesTable(std::move(columns));
}

struct RankExperimentConfig {
    std::vector<int> ranks{2, 9};
    int replicates = 50;
    std::size_t samples = 10000;
    std::uint64_t base_seed = 0;
    int size = 9;
    std::vector<int> dimensions{2, 3, 4, 5};
    std::vector<MeasureKind> measures{MeasureKind::o_information, MeasureKind::s_information};
    WeightAggregator aggregator = WeightAggregator::mean;
    double weight_floor = kDefaultWeightFloor;
    LaplacianForm laplacian_form = LaplacianForm::derived;
    /// Random bases per signal for the random-basis control; 0 disables it.
    int random_bases = 0;
    RandomBasisInner random_inner = RandomBasisInner::weighted;
    int jobs = 1;
};

/// Averaged curves for one (rank, dimension, measure) cell.
struct RankCurves {
    int rank = 0;
    int dimension = 0;
    MeasureKind measure = MeasureKind::o_information;
    std::vector<Eigen::VectorXd> fourier;  ///< per replicate
    CurveBand fourier_band;                ///< across replicates
    std::vector<Eigen::VectorXd> random;   ///< per replicate, mean over that replicate's draws
    CurveBand random_band;                 ///< across replicates
    int undefined = 0;                     ///< replicates whose signal was all zero
};

struct ReplicateSeeds {
    int rank = 0;
    int replicate = 0;
    std::uint64_t covariance = 0;
    std::uint64_t sample = 0;
    std::uint64_t random = 0;
};

struct RankExperimentResult {
    RankExperimentConfig config;
    std::vector<RankCurves> curves;
    std::vector<ReplicateSeeds> seeds;
    /// Per rank, number of subset entropies that needed the diagonal ridge,
    /// summed over replicates.
    std::map<int, std::size_t> regularized_subsets;

    const RankCurves& find(int rank, int dimension, MeasureKind measure) const
    {
        for (const auto& c : curves)
            if (c.rank == rank && c.dimension == dimension && c.measure == measure)
                return c;
        throw ValidationError("no curves for rank " + std::to_string(rank) + ", dimension " +
                              std::to_string(dimension));
    }
};

namespace detail {

[[noreturn]] inline void rethrow_with_context(const std::string& context)
{
    try {
        throw;
    } catch (const CapacityError& e) {
        throw CapacityError(context + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(context + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(context + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(context + ": " + e.what());
    }
}

inline ReplicateSeeds replicate_seeds(std::uint64_t base, int rank, int replicate)
{
    const std::uint64_t root = derive_seed(base, static_cast<std::uint64_t>(rank), static_cast<std::uint64_t>(replicate));
    return {rank, replicate, derive_seed(root, 1), derive_seed(root, 2), derive_seed(root, 3)};
}

struct ReplicateOutput {
    // Indexed [dimension index][measure index]; empty vector = undefined CEV.
    std::vector<std::vector<Eigen::VectorXd>> fourier;
    std::vector<std::vector<Eigen::VectorXd>> random;
    std::size_t regularized = 0;
};

inline ReplicateOutput run_replicate(const RankExperimentConfig& cfg, const ReplicateSeeds& seeds)
{
    const RankedCovariance cov = random_rank_covariance(cfg.size, seeds.rank, seeds.covariance);
    const ContinuousSeriesTable table = sample_gaussian(cov, cfg.samples, seeds.sample);
    const GaussianEntropyOracle oracle(copula_gaussian_fit(table));
    const StructuralSimplex simplex =
        structural_weights(mutual_information_matrix(oracle), cfg.aggregator, cfg.weight_floor);

    ReplicateOutput out;
    out.fourier.resize(cfg.dimensions.size());
    out.random.resize(cfg.dimensions.size());
    for (std::size_t di = 0; di < cfg.dimensions.size(); ++di) {
        const int n = cfg.dimensions[di];
        const FourierBasis basis = fourier_basis(simplex, n, cfg.laplacian_form);
        for (std::size_t mi = 0; mi < cfg.measures.size(); ++mi) {
            const HighOrderSignal signal = build_signal(oracle, simplex, n, cfg.measures[mi]);
            if (!(signal.coefficients().cwiseAbs().maxCoeff() > kZeroSignalTolerance)) {
                out.fourier[di].emplace_back();
                out.random[di].emplace_back();
                continue;
            }
            if (cfg.random_bases > 0) {
                const ControlComparison cc = control_comparison(
                    signal, basis, cfg.random_bases, derive_seed(seeds.random, di, mi), cfg.random_inner);
                out.fourier[di].push_back(cc.fourier_cev);
                out.random[di].push_back(cc.random_band.mean);
            } else {
                out.fourier[di].push_back(cev_report(to_fourier(signal, basis)).cev);
                out.random[di].emplace_back();
            }
        }
    }
    out.regularized = oracle.regularized_subsets().size();
    return out;
}

}  // namespace detail

inline RankExperimentResult rank_experiment(const RankExperimentConfig& cfg)
{
    detail::require(!cfg.ranks.empty(), "need at least one rank");
    detail::require(cfg.replicates >= 1, "need at least one replicate");
    detail::require(cfg.samples >= 3, "need at least 3 samples per replicate");
    detail::require(cfg.random_bases >= 0, "random basis count must be non-negative");
    for (int r : cfg.ranks)
        detail::require(r >= 1 && r <= cfg.size, "rank " + std::to_string(r) + " outside [1, size]");
    for (int n : cfg.dimensions)
        detail::require(n >= 2 && n <= cfg.size - 1, "signal dimension " + std::to_string(n) + " outside [2, N]");

    RankExperimentResult result;
    result.config = cfg;
    for (int rank : cfg.ranks)
        for (int rep = 0; rep < cfg.replicates; ++rep)
            result.seeds.push_back(detail::replicate_seeds(cfg.base_seed, rank, rep));

    std::vector<detail::ReplicateOutput> outputs(result.seeds.size());
    parallel_for(outputs.size(), cfg.jobs, [&](std::size_t i) {
        try {
            outputs[i] = detail::run_replicate(cfg, result.seeds[i]);
        } catch (...) {
            detail::rethrow_with_context("rank " + std::to_string(result.seeds[i].rank) + ", replicate " +
                                         std::to_string(result.seeds[i].replicate));
        }
    });

    // Seed-ordered reduction keeps results independent of scheduling.
    for (int rank : cfg.ranks) {
        for (std::size_t di = 0; di < cfg.dimensions.size(); ++di) {
            for (std::size_t mi = 0; mi < cfg.measures.size(); ++mi) {
                RankCurves cell;
                cell.rank = rank;
                cell.dimension = cfg.dimensions[di];
                cell.measure = cfg.measures[mi];
                for (std::size_t i = 0; i < outputs.size(); ++i) {
                    if (result.seeds[i].rank != rank)
                        continue;
                    const Eigen::VectorXd& f = outputs[i].fourier[di][mi];
                    if (f.size() == 0) {
                        ++cell.undefined;
                        continue;
                    }
                    cell.fourier.push_back(f);
                    if (outputs[i].random[di][mi].size() > 0)
                        cell.random.push_back(outputs[i].random[di][mi]);
                }
                if (!cell.fourier.empty())
                    cell.fourier_band = summarize_curves(cell.fourier);
                if (!cell.random.empty())
                    cell.random_band = summarize_curves(cell.random);
                result.curves.push_back(std::move(cell));
            }
        }
        std::size_t flagged = 0;
        for (std::size_t i = 0; i < outputs.size(); ++i)
            if (result.seeds[i].rank == rank)
                flagged += outputs[i].regularized;
        result.regularized_subsets[rank] = flagged;
    }
    return result;
}

}  // namespace hyperharmonic
