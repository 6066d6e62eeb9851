/**
 * Combinatorics of the standard N-simplex.
 *
 * The n-simplices of the standard N-simplex are the (n+1)-element subsets of
 * {0, ..., N}. They are ordered lexicographically by their sorted vertex
 * tuples; this order fixes the canonical basis of every signal space and the
 * row/column order of every boundary matrix.
 */
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hyperharmonic/errors.hpp"

namespace hyperharmonic {

/// Default upper bound on N (number of variables minus one).
inline constexpr int kDefaultMaxN = 16;

/// Largest list of simplices `enumerate_simplices` will materialise.
inline constexpr std::uint64_t kMaxEnumeration = std::uint64_t{1} << 26;

/// Binomial coefficient C(n, k); zero outside 0 <= k <= n.
inline std::uint64_t binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n)
        return 0;
    if (k > n - k)
        k = n - k;
    std::uint64_t result = 1;
    for (int i = 1; i <= k; ++i) {
        const std::uint64_t numerator = static_cast<std::uint64_t>(n - k + i);
        if (result > std::numeric_limits<std::uint64_t>::max() / numerator)
            throw CapacityError("binomial coefficient C(" + std::to_string(n) + ", " + std::to_string(k) +
                                ") overflows 64 bits");
        result = result * numerator / static_cast<std::uint64_t>(i);
    }
    return result;
}

/// Number of n-simplices of the standard N-simplex, C(N+1, n+1).
inline std::uint64_t simplex_count(int N, int n) { return binomial(N + 1, n + 1); }

/// An oriented simplex [v_0, ..., v_n] with strictly increasing vertices.
class SimplexId {
public:
    SimplexId() = default;
    explicit SimplexId(std::vector<int> vertices) : vertices_(std::move(vertices))
    {
        detail::require(!vertices_.empty(), "a simplex needs at least one vertex");
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            detail::require(vertices_[i] >= 0, "simplex vertices must be non-negative");
            detail::require(i == 0 || vertices_[i - 1] < vertices_[i],
                            "simplex vertices must be strictly increasing");
        }
    }

    int dimension() const { return static_cast<int>(vertices_.size()) - 1; }
    const std::vector<int>& vertices() const { return vertices_; }
    int operator[](std::size_t i) const { return vertices_[i]; }

    /// The face [v_0, ..., v_{i-1}, v_{i+1}, ..., v_n].
    SimplexId face(int omitted) const
    {
        std::vector<int> rest;
        rest.reserve(vertices_.size() - 1);
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            if (static_cast<int>(i) != omitted)
                rest.push_back(vertices_[i]);
        SimplexId result;
        result.vertices_ = std::move(rest);
        return result;
    }

    /// Dash-separated vertex label, e.g. "0-2-3".
    std::string label() const
    {
        std::string out;
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            if (i)
                out += '-';
            out += std::to_string(vertices_[i]);
        }
        return out;
    }

    friend auto operator<=>(const SimplexId&, const SimplexId&) = default;

private:
    std::vector<int> vertices_;
};

namespace detail {

inline void validate_dimension(int N, int n)
{
    require(N >= 0, "N must be non-negative");
    require(n >= 0 && n <= N,
            "simplex dimension " + std::to_string(n) + " outside [0, " + std::to_string(N) + "]");
}

}  // namespace detail

/// All n-simplices of the standard N-simplex in lexicographic order.
inline std::vector<SimplexId> enumerate_simplices(int N, int n)
{
    detail::validate_dimension(N, n);
    const std::uint64_t count = simplex_count(N, n);
    if (count > kMaxEnumeration)
        throw CapacityError("refusing to enumerate " + std::to_string(count) + " simplices");

    std::vector<SimplexId> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<int> current(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i)
        current[i] = i;
    for (;;) {
        out.emplace_back(current);
        int i = n;
        while (i >= 0 && current[i] == N - n + i)
            --i;
        if (i < 0)
            break;
        ++current[i];
        for (int j = i + 1; j <= n; ++j)
            current[j] = current[j - 1] + 1;
    }
    return out;
}

/// Position of `id` in `enumerate_simplices(N, id.dimension())`.
inline std::uint64_t simplex_rank(const SimplexId& id, int N)
{
    const int n = id.dimension();
    detail::validate_dimension(N, n);
    detail::require(id.vertices().back() <= N, "simplex vertex exceeds N");
    const int vertices = N + 1;
    std::uint64_t rank = 0;
    int previous = -1;
    for (int i = 0; i <= n; ++i) {
        // Every tuple that agrees on the first i vertices but has a smaller
        // i-th vertex precedes `id`.
        for (int v = previous + 1; v < id[i]; ++v)
            rank += binomial(vertices - 1 - v, n - i);
        previous = id[i];
    }
    return rank;
}

/// Inverse of `simplex_rank` for a fixed dimension n.
inline SimplexId simplex_unrank(std::uint64_t rank, int N, int n)
{
    detail::validate_dimension(N, n);
    const std::uint64_t count = simplex_count(N, n);
    detail::require(rank < count, "simplex rank " + std::to_string(rank) + " out of range [0, " +
                                      std::to_string(count) + ")");
    const int vertices = N + 1;
    std::vector<int> out(static_cast<std::size_t>(n + 1));
    int v = 0;
    for (int i = 0; i <= n; ++i) {
        for (;; ++v) {
            const std::uint64_t block = binomial(vertices - 1 - v, n - i);
            if (rank < block)
                break;
            rank -= block;
        }
        out[i] = v++;
    }
    return SimplexId(std::move(out));
}

}  // namespace hyperharmonic
