#include <catch_amalgamated.hpp>

#include "hyperharmonic/synth.hpp"

using namespace hyperharmonic;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXd sample_covariance(const ContinuousSeriesTable& t)
{
    const auto k = static_cast<Eigen::Index>(t.num_variables());
    const auto T = static_cast<Eigen::Index>(t.length());
    Eigen::MatrixXd x(T, k);
    for (Eigen::Index c = 0; c < k; ++c)
        for (Eigen::Index r = 0; r < T; ++r)
            x(r, c) = t.columns()[c][r];
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(T - 1);
}

RankExperimentConfig small_config()
{
    RankExperimentConfig cfg;
    cfg.replicates = 2;
    cfg.samples = 2000;
    cfg.size = 6;
    cfg.ranks = {2, 6};
    cfg.dimensions = {2, 3};
    return cfg;
}

}  // namespace

TEST_CASE("rank-controlled covariances")
{
    const RankedCovariance full = random_rank_covariance(9, 9, 3);
    CHECK(full.matrix == full.source);
    CHECK(numerical_rank(full.matrix) == 9);

    const RankedCovariance one = random_rank_covariance(9, 1, 3);
    CHECK(numerical_rank(one.matrix) == 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(one.matrix);
    const Eigen::VectorXd top = es.eigenvectors().col(8);
    const Eigen::MatrixXd outer = es.eigenvalues()(8) * top * top.transpose();
    CHECK((outer - one.matrix).norm() < 1e-8 * one.matrix.norm());

    for (int r = 1; r <= 9; ++r) {
        const RankedCovariance c = random_rank_covariance(9, r, 11);
        CHECK(numerical_rank(c.matrix) == r);
        CHECK((c.matrix - c.matrix.transpose()).norm() == 0.0);
        if (r < 9)
            CHECK(c.matrix.trace() < c.source.trace());
        else
            CHECK(c.matrix.trace() == c.source.trace());
    }
    CHECK(random_rank_covariance(9, 4, 7).matrix == random_rank_covariance(9, 4, 7).matrix);
    CHECK_THROWS_AS(random_rank_covariance(9, 0, 1), ValidationError);
    CHECK_THROWS_AS(random_rank_covariance(9, 10, 1), ValidationError);
}

TEST_CASE("gaussian sampling")
{
    SECTION("sample covariance converges")
    {
        const RankedCovariance c = random_rank_covariance(9, 9, 5);
        // Entries of A = M M^T scale with the size; compare on a unit scale.
        RankedCovariance scaled = c;
        scaled.matrix /= 9.0;
        const Eigen::MatrixXd s = sample_covariance(sample_gaussian(scaled, 100000, 2));
        CHECK((s - scaled.matrix).cwiseAbs().maxCoeff() < 0.05);
    }
    SECTION("rank one gives proportional columns")
    {
        const RankedCovariance c = random_rank_covariance(4, 1, 8);
        const ContinuousSeriesTable t = sample_gaussian(c, 200, 1);
        const Eigen::MatrixXd s = sample_covariance(t);
        CHECK(numerical_rank(s, 1e-8) == 1);
    }
    SECTION("deterministic per seed")
    {
        const RankedCovariance c = random_rank_covariance(5, 3, 1);
        CHECK(sample_gaussian(c, 100, 9).columns() == sample_gaussian(c, 100, 9).columns());
        CHECK(sample_gaussian(c, 100, 9).columns() != sample_gaussian(c, 100, 10).columns());
    }
}

TEST_CASE("copula pipeline matches the analytic gaussian total correlation")
{
    const RankedCovariance c = random_rank_covariance(9, 9, 4);
    const GaussianModel g = copula_gaussian_fit(sample_gaussian(c, 5000, 4));
    const GaussianEntropyOracle oracle(g);
    for (const VariableSet& s : {VariableSet{0, 1}, VariableSet{2, 5, 7}, VariableSet{0, 1, 2, 3, 4, 5, 6, 7, 8}}) {
        Eigen::MatrixXd sub(s.size(), s.size());
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t b = 0; b < s.size(); ++b)
                sub(a, b) = g.correlation_matrix()(s[a], s[b]);
        CHECK_THAT(total_correlation(oracle, s), WithinAbs(-0.5 * std::log2(sub.determinant()), 1e-9));
    }
}

TEST_CASE("replicate seeds are stable under adding replicates")
{
    const auto a = detail::replicate_seeds(0, 2, 3);
    const auto b = detail::replicate_seeds(0, 2, 3);
    CHECK(a.covariance == b.covariance);
    CHECK(a.sample != a.covariance);
    CHECK(detail::replicate_seeds(0, 2, 4).covariance != a.covariance);
    CHECK(detail::replicate_seeds(0, 9, 3).covariance != a.covariance);
}

TEST_CASE("rank experiment")
{
    SECTION("deterministic and independent of the job count")
    {
        RankExperimentConfig cfg = small_config();
        const RankExperimentResult serial = rank_experiment(cfg);
        cfg.jobs = 3;
        const RankExperimentResult threaded = rank_experiment(cfg);
        REQUIRE(serial.curves.size() == 2 * 2 * 2);
        for (std::size_t i = 0; i < serial.curves.size(); ++i) {
            CHECK(serial.curves[i].fourier_band.mean == threaded.curves[i].fourier_band.mean);
            CHECK(serial.curves[i].fourier.size() == 2);
        }
        CHECK(serial.seeds.size() == 4);
    }
    SECTION("a single rank gives a single family of curves")
    {
        RankExperimentConfig cfg = small_config();
        cfg.ranks = {6};
        const RankExperimentResult r = rank_experiment(cfg);
        CHECK(r.curves.size() == 2 * 2);
        const RankCurves& c = r.find(6, 3, MeasureKind::o_information);
        CHECK(c.fourier_band.mean.size() == 15);
        CHECK_THAT(c.fourier_band.mean(14), WithinAbs(1.0, 1e-12));
        CHECK_THROWS_AS(r.find(2, 3, MeasureKind::o_information), ValidationError);
    }
    SECTION("random-basis control per replicate")
    {
        RankExperimentConfig cfg = small_config();
        cfg.ranks = {2};
        cfg.random_bases = 4;
        const RankExperimentResult r = rank_experiment(cfg);
        const RankCurves& c = r.find(2, 2, MeasureKind::o_information);
        CHECK(c.random.size() == 2);
        CHECK(c.random_band.mean.size() == c.fourier_band.mean.size());
    }
    SECTION("invalid configurations")
    {
        RankExperimentConfig cfg = small_config();
        cfg.dimensions = {6};
        CHECK_THROWS_AS(rank_experiment(cfg), ValidationError);
        cfg = small_config();
        cfg.ranks = {7};
        CHECK_THROWS_AS(rank_experiment(cfg), ValidationError);
    }
}
