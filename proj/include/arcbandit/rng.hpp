#pragma once

#include "arcbandit/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace arcbandit {

using Rng = std::mt19937_64;

enum class StreamTag : std::uint32_t {
    theta = 1,
    arrivals = 2,
    purchases = 3,
    policy = 4,
};

/// Independent stream for (master seed, replication, tag).
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t replication, StreamTag tag)
{
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed & 0xffffffffu),
        static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(replication & 0xffffffffu),
        static_cast<std::uint32_t>(replication >> 32),
        static_cast<std::uint32_t>(tag),
        0x41524342u,
    };
    return Rng(seq);
}

inline double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline VectorXd standard_normal(Index n, Rng& rng)
{
    std::normal_distribution<double> dist;
    VectorXd z(n);
    for (Index i = 0; i < n; ++i)
        z(i) = dist(rng);
    return z;
}

/// Square-root factor L with L L^T = cov. Cholesky first; a positive
/// semidefinite cov (e.g. exactly zero) falls back to the eigen square root.
inline MatrixXd covariance_factor(const MatrixXd& cov)
{
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success)
        return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-12 * scale)
        throw std::runtime_error("covariance is not positive semidefinite");
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

inline VectorXd sample_gaussian(const VectorXd& mean, const MatrixXd& factor, Rng& rng)
{
    return mean + factor * standard_normal(mean.size(), rng);
}

} // namespace arcbandit
