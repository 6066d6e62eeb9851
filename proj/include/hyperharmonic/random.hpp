#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace hyperharmonic {

/// Independent sub-seed for (base, stream, index) via a splitmix64 mix, so
/// adding replicates never perturbs the seeds of earlier ones.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ stream) ^ index);
}

inline Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd out(rows, cols);
    // Row-major fill keeps the draw order independent of Eigen's storage order.
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            out(r, c) = normal(engine);
    return out;
}

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Results must be
/// written to per-index slots; the first exception is rethrown after all
/// workers finish.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::mutex mutex;
    std::size_t next = 0;
    std::exception_ptr failure;
    std::size_t failed_index = count;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i;
                    {
                        std::lock_guard lock(mutex);
                        if (next >= count || failure)
                            return;
                        i = next++;
                    }
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(mutex);
                        if (i < failed_index) {
                            failed_index = i;
                            failure = std::current_exception();
                        }
                    }
                }
            });
    }
    if (failure)
        std::rethrow_exception(failure);
}

}  // namespace hyperharmonic
