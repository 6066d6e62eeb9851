#include <catch_amalgamated.hpp>

#include "hyperharmonic/simplex.hpp"
#include "oracle.hpp"

using namespace hyperharmonic;

TEST_CASE("binomial coefficients and simplex counts")
{
    CHECK(binomial(4, 2) == 6);
    CHECK(binomial(5, 0) == 1);
    CHECK(binomial(3, 4) == 0);
    CHECK(binomial(3, -1) == 0);
    CHECK(simplex_count(3, 1) == 6);
    CHECK(simplex_count(8, 4) == 126);
    CHECK(binomial(62, 31) == 465428353255261088ULL);
    CHECK_THROWS_AS(binomial(200, 100), CapacityError);
}

TEST_CASE("simplex ids validate and print")
{
    const SimplexId s({0, 2, 3});
    CHECK(s.dimension() == 2);
    CHECK(s.label() == "0-2-3");
    CHECK(s.face(0).label() == "2-3");
    CHECK(s.face(1).label() == "0-3");
    CHECK(s.face(2).label() == "0-2");
    CHECK_THROWS_AS(SimplexId({2, 1}), ValidationError);
    CHECK_THROWS_AS(SimplexId({1, 1}), ValidationError);
    CHECK_THROWS_AS(SimplexId({-1, 0}), ValidationError);
    CHECK_THROWS_AS(SimplexId(std::vector<int>{}), ValidationError);
    CHECK(SimplexId({0, 1}) < SimplexId({0, 2}));
}

TEST_CASE("enumeration is lexicographic and matches brute force")
{
    for (int N = 0; N <= 8; ++N)
        for (int n = 0; n <= N; ++n) {
            const auto ids = enumerate_simplices(N, n);
            const auto expected = oracle::subsets(N, n);
            REQUIRE(ids.size() == expected.size());
            for (std::size_t i = 0; i < ids.size(); ++i)
                CHECK(ids[i].vertices() == expected[i]);
        }
    const auto edges = enumerate_simplices(3, 1);
    std::vector<std::string> labels;
    for (const auto& e : edges)
        labels.push_back(e.label());
    CHECK(labels == std::vector<std::string>{"0-1", "0-2", "0-3", "1-2", "1-3", "2-3"});
}

TEST_CASE("rank and unrank round-trip exhaustively for N <= 8")
{
    for (int N = 0; N <= 8; ++N)
        for (int n = 0; n <= N; ++n) {
            const auto ids = enumerate_simplices(N, n);
            for (std::size_t r = 0; r < ids.size(); ++r) {
                REQUIRE(simplex_rank(ids[r], N) == r);
                REQUIRE(simplex_unrank(r, N, n) == ids[r]);
            }
        }
}

TEST_CASE("rank and unrank reject out-of-range input")
{
    CHECK_THROWS_AS(simplex_unrank(6, 3, 1), ValidationError);
    CHECK_THROWS_AS(simplex_rank(SimplexId({0, 4}), 3), ValidationError);
    CHECK_THROWS_AS(enumerate_simplices(3, 4), ValidationError);
    CHECK_THROWS_AS(enumerate_simplices(-1, 0), ValidationError);
    CHECK_THROWS_AS(enumerate_simplices(40, 20), CapacityError);
}

TEST_CASE("rank is usable far beyond enumeration limits")
{
    const int N = 40;
    const SimplexId last({20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33, 34, 35, 36, 37, 38, 39, 40});
    CHECK(simplex_rank(last, N) == simplex_count(N, 20) - 1);
    CHECK(simplex_unrank(simplex_count(N, 20) - 1, N, 20) == last);
}
