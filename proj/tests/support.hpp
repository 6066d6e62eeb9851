// Glue between the brute-force oracle and library types.
#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "hyperharmonic/distribution.hpp"
#include "hyperharmonic/spectral.hpp"
#include "oracle.hpp"

namespace support {

inline hyperharmonic::JointDistribution to_library(const oracle::DensePmf& d)
{
    hyperharmonic::JointDistribution::MassMap mass;
    for (std::size_t i = 0; i < d.p.size(); ++i)
        if (d.p[i] > 0.0)
            mass.emplace(d.decode(i), d.p[i]);
    return hyperharmonic::JointDistribution::from_weights(d.sizes, mass);
}

/// Weights drawn uniformly from [lo, hi) for every dimension of the N-simplex.
inline hyperharmonic::StructuralSimplex random_simplex(int N, std::mt19937_64& rng, double lo = 0.1, double hi = 2.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Eigen::VectorXd> w;
    for (int n = 0; n <= N; ++n) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(hyperharmonic::simplex_count(N, n)));
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v(i) = u(rng);
        w.push_back(v);
    }
    return {N, std::move(w)};
}

inline hyperharmonic::StructuralSimplex unit_simplex(int N)
{
    std::vector<Eigen::VectorXd> w;
    for (int n = 0; n <= N; ++n)
        w.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(hyperharmonic::simplex_count(N, n))));
    return {N, std::move(w)};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("hyperharmonic-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace support
