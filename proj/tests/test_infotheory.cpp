#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <thread>

#include "hyperharmonic/infotheory.hpp"
#include "hyperharmonic/units.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace hyperharmonic;
using Catch::Matchers::WithinAbs;

namespace {

VariableSet all_of(int vars)
{
    VariableSet s(static_cast<std::size_t>(vars));
    for (int i = 0; i < vars; ++i)
        s[i] = i;
    return s;
}

}  // namespace

TEST_CASE("mutual information examples")
{
    const DiscreteEntropyOracle x(support::to_library(oracle::xor_triple()));
    CHECK(mutual_information(x, 0, 1) == 0.0);
    CHECK(mutual_information(x, 1, 2) == 0.0);
    const DiscreteEntropyOracle c(support::to_library(oracle::copy(2)));
    CHECK_THAT(mutual_information(c, 0, 1), WithinAbs(1.0, 1e-15));
    const DiscreteEntropyOracle i(support::to_library(oracle::independent({0.3, 0.7})));
    CHECK(mutual_information(i, 0, 1) >= 0.0);
    CHECK_THAT(mutual_information(i, 0, 1), WithinAbs(0.0, 1e-12));
    CHECK_THROWS_AS(mutual_information(c, 1, 1), ValidationError);
}

TEST_CASE("measures on the xor triple and the 3-bit copy")
{
    const DiscreteEntropyOracle x(support::to_library(oracle::xor_triple()));
    const DiscreteEntropyOracle c(support::to_library(oracle::copy(3)));
    const VariableSet s{0, 1, 2};
    CHECK_THAT(total_correlation(x, s), WithinAbs(1.0, 1e-12));
    CHECK_THAT(dual_total_correlation(x, s), WithinAbs(2.0, 1e-12));
    CHECK_THAT(o_information(x, s), WithinAbs(-1.0, 1e-12));
    CHECK_THAT(s_information(x, s), WithinAbs(3.0, 1e-12));
    CHECK_THAT(interaction_information(x, s), WithinAbs(-1.0, 1e-12));

    CHECK_THAT(total_correlation(c, s), WithinAbs(2.0, 1e-12));
    CHECK_THAT(dual_total_correlation(c, s), WithinAbs(1.0, 1e-12));
    CHECK_THAT(o_information(c, s), WithinAbs(1.0, 1e-12));
    CHECK_THAT(s_information(c, s), WithinAbs(3.0, 1e-12));
}

TEST_CASE("measures vanish on independent variables")
{
    const DiscreteEntropyOracle d(support::to_library(oracle::independent({0.2, 0.5, 0.9, 0.4})));
    for (auto kind : {MeasureKind::tc, MeasureKind::dtc, MeasureKind::o_information, MeasureKind::s_information,
                      MeasureKind::interaction_information})
        CHECK_THAT(evaluate_measure(kind, d, all_of(4)), WithinAbs(0.0, 1e-12));
    CHECK(signal_sweep(d, 3, 2, MeasureKind::o_information).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("size preconditions")
{
    const DiscreteEntropyOracle d(support::to_library(oracle::copy(3)));
    CHECK_THROWS_AS(total_correlation(d, {0}), ValidationError);
    CHECK_THROWS_AS(dual_total_correlation(d, {1}), ValidationError);
    CHECK_THROWS_AS(o_information(d, {0, 1}), ValidationError);
    CHECK_THROWS_AS(interaction_information(d, {}), ValidationError);
    CHECK_THROWS_AS(total_correlation(d, {0, 0}), ValidationError);
    CHECK_THROWS_AS(signal_sweep(d, 2, 1, MeasureKind::o_information), ValidationError);
}

TEST_CASE("interaction information of a pair is the mutual information")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const DiscreteEntropyOracle d(support::to_library(oracle::random_pmf(3, rng)));
        CHECK_THAT(interaction_information(d, {0, 2}), WithinAbs(mutual_information(d, 0, 2), 1e-12));
    }
}

TEST_CASE("signal sweeps follow the canonical simplex order")
{
    const DiscreteEntropyOracle x(support::to_library(oracle::xor_triple()));
    const Eigen::VectorXd s = signal_sweep(x, 2, 2, MeasureKind::o_information);
    REQUIRE(s.size() == 1);
    CHECK_THAT(s(0), WithinAbs(-1.0, 1e-12));

    // xor on {0,1,2} plus an independent bit 3: only [012] is synergistic.
    const DiscreteEntropyOracle d(support::to_library(oracle::product(oracle::xor_triple(), oracle::independent({0.5}))));
    const Eigen::VectorXd w = signal_sweep(d, 3, 2, MeasureKind::o_information);
    REQUIRE(w.size() == 4);
    CHECK_THAT(w(0), WithinAbs(-1.0, 1e-12));
    for (int k = 1; k < 4; ++k)
        CHECK_THAT(w(k), WithinAbs(0.0, 1e-12));
}

TEST_CASE("every measure matches brute-force enumeration")
{
    std::vector<oracle::DensePmf> cases{oracle::xor_triple(), oracle::copy(2), oracle::copy(3), oracle::copy(4),
                                        oracle::independent({0.3, 0.5, 0.8}),
                                        oracle::pair_products({0.9, 0.7}, false),
                                        oracle::pair_products({0.8}, true)};
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 20; ++k)
        cases.push_back(oracle::random_pmf(k % 2 == 0 ? 4 : 3, rng, 0.25));

    for (const auto& dense : cases) {
        const DiscreteEntropyOracle d(support::to_library(dense));
        const int vars = dense.vars();
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << vars); ++mask) {
            const VariableSet subset = from_mask(mask);
            // Restrict the dense pmf to the subset so the oracle sees only those variables.
            oracle::DensePmf sub;
            for (int v : subset)
                sub.sizes.push_back(dense.sizes[v]);
            sub.p.assign(oracle::cells(sub.sizes), 0.0);
            for (std::size_t i = 0; i < dense.p.size(); ++i) {
                const auto x = dense.decode(i);
                std::size_t index = 0;
                for (int v : subset)
                    index = index * static_cast<std::size_t>(dense.sizes[v]) + static_cast<std::size_t>(x[v]);
                sub.p[index] += dense.p[i];
            }
            CHECK_THAT(d.entropy(subset), WithinAbs(oracle::entropy_bits(sub, oracle::full_mask(sub.vars())), 1e-10));
            if (subset.size() >= 2) {
                CHECK_THAT(interaction_information(d, subset), WithinAbs(oracle::interaction(sub), 1e-10));
                CHECK_THAT(total_correlation(d, subset), WithinAbs(oracle::tc(sub), 1e-10));
                CHECK_THAT(dual_total_correlation(d, subset), WithinAbs(oracle::dtc(sub), 1e-10));
                CHECK_THAT(s_information(d, subset), WithinAbs(oracle::sigma(sub), 1e-10));
            }
            if (subset.size() >= 3)
                CHECK_THAT(o_information(d, subset), WithinAbs(oracle::omega(sub), 1e-10));
        }
    }
}

TEST_CASE("symmetry, bounds and the chain rule on random distributions")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const DiscreteEntropyOracle d(support::to_library(oracle::random_pmf(5, rng, 0.2)));
        VariableSet s{0, 1, 2, 3, 4};
        const double omega = o_information(d, s);
        const double sigma = s_information(d, s);
        CHECK(std::abs(omega) <= sigma + 1e-10);

        double chain = 0.0;
        for (int i = 0; i < 5; ++i) {
            VariableSet rest;
            for (int v = 0; v < 5; ++v)
                if (v != i)
                    rest.push_back(v);
            chain += d.entropy(VariableSet{i}) + d.entropy(rest) - d.entropy(s);
        }
        CHECK_THAT(sigma, WithinAbs(chain, 1e-10));

        VariableSet shuffled{3, 0, 4, 2, 1};
        CHECK(o_information(d, shuffled) == omega);
        CHECK(total_correlation(d, shuffled) == total_correlation(d, s));
    }
}

TEST_CASE("additivity over independent subsystems")
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = oracle::random_pmf(3, rng, 0.2);
        const auto b = oracle::random_pmf(4, rng, 0.2);
        const DiscreteEntropyOracle joint(support::to_library(oracle::product(a, b)));
        const DiscreteEntropyOracle first(support::to_library(a));
        const DiscreteEntropyOracle second(support::to_library(b));
        const double sum = o_information(first, all_of(3)) + o_information(second, all_of(4));
        CHECK_THAT(o_information(joint, all_of(7)), WithinAbs(sum, 1e-10));
    }
}

TEST_CASE("pairwise-factorised systems with an odd variable count have zero O-information")
{
    for (const auto& agree : {std::vector<double>{0.9}, std::vector<double>{0.9, 0.6},
                              std::vector<double>{0.95, 0.8, 0.7}}) {
        const auto dense = oracle::pair_products(agree, true);
        const DiscreteEntropyOracle d(support::to_library(dense));
        CHECK_THAT(o_information(d, all_of(dense.vars())), WithinAbs(0.0, 1e-10));
    }
}

TEST_CASE("gaussian oracle reproduces the analytic total correlation")
{
    Eigen::Matrix3d r;
    r << 1, 0.5, 0.2, 0.5, 1, 0.3, 0.2, 0.3, 1;
    const GaussianEntropyOracle g{GaussianModel(r)};
    CHECK_THAT(total_correlation(g, {0, 1, 2}), WithinAbs(-0.5 * std::log2(r.determinant()), 1e-10));
    CHECK_THAT(mutual_information(g, 0, 1), WithinAbs(-0.5 * std::log2(0.75), 1e-10));
    CHECK(g.regularized_subsets().empty());
}

TEST_CASE("log base switches units")
{
    const DiscreteEntropyOracle bits(support::to_library(oracle::xor_triple()));
    CHECK_THAT(o_information(bits, {0, 1, 2}), WithinAbs(-1.0, 1e-12));
    const ScopedLogBase nats(LogBase::nats);
    const DiscreteEntropyOracle d(support::to_library(oracle::xor_triple()));
    CHECK_THAT(o_information(d, {0, 1, 2}), WithinAbs(-std::log(2.0), 1e-12));
    // A cache filled in bits must not leak bit values into nat queries.
    CHECK_THAT(o_information(bits, {0, 1, 2}), WithinAbs(-std::log(2.0), 1e-12));
}

TEST_CASE("measure names round-trip")
{
    for (auto kind : {MeasureKind::tc, MeasureKind::dtc, MeasureKind::o_information, MeasureKind::s_information,
                      MeasureKind::interaction_information})
        CHECK(parse_measure_kind(to_string(kind)) == kind);
    CHECK(parse_measure_kind("omega") == MeasureKind::o_information);
    CHECK_THROWS_AS(parse_measure_kind("pid"), ValidationError);
}

TEST_CASE("concurrent queries agree with sequential ones")
{
    std::mt19937_64 rng(8);
    const auto dist = support::to_library(oracle::random_pmf(6, rng));
    const DiscreteEntropyOracle shared(dist);
    const DiscreteEntropyOracle reference(dist);
    std::vector<double> results(64 * 4);
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < 4; ++t)
            pool.emplace_back([&, t] {
                for (std::uint64_t m = 1; m < 64; ++m)
                    results[t * 64 + m] = shared.entropy(m);
            });
    }
    for (int t = 0; t < 4; ++t)
        for (std::uint64_t m = 1; m < 64; ++m)
            CHECK(results[t * 64 + m] == reference.entropy(m));
    CHECK(shared.cache_size() == 63);
}
