#pragma once

#include "arcbandit/glm.hpp"
#include "arcbandit/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace arcbandit {

/// Approximate posterior N(mean, cov) over the hidden parameter.
template <class Scalar>
struct GaussianBelief {
    Vector<Scalar> mean;
    Matrix<Scalar> cov;

    Index dim() const { return mean.size(); }
};

/// One day's data for the chosen arm.
struct BatchObservation {
    std::int64_t n = 0;
    std::int64_t successes = 0;
    Index arm = 0;
};

template <class Scalar>
struct PseudoObservation {
    Scalar psi;     // linearised link transform of the batch mean
    Scalar weight;  // S = n V(psi)
};

inline constexpr double kCovarianceFloor = 1e-12;

/// Linearised pseudo-observation of a batch:
///   P = successes/n,  P^ = G'(phi(m^T x)),
///   Psi = m^T x + (P - P^) psi'(P^),  S = n V(Psi).
template <class Scalar>
PseudoObservation<Scalar> pseudo_observation(const GaussianBelief<Scalar>& belief, const BatchObservation& obs,
                                             const ArmSet<Scalar>& arms, const GlmSpec<Scalar>& spec)
{
    arms.check_index(obs.arm);
    if (obs.n < 1)
        throw std::invalid_argument("batch observation needs at least one customer");
    if (obs.successes < 0 || obs.successes > obs.n)
        throw std::invalid_argument("batch successes must lie in [0, n]");

    const Scalar n = static_cast<Scalar>(obs.n);
    const Scalar y = arms.feature(obs.arm).dot(belief.mean);
    const Scalar p = static_cast<Scalar>(obs.successes) / n;
    const Scalar p_hat = spec.g1(spec.phi(y));
    const Scalar psi = y + (p - p_hat) * spec.psi1(p_hat);
    return {psi, n * spec.v(psi)};
}

/// Rank-one Kalman update in Woodbury form with an explicit pseudo-observation:
///   R = S / (S x^T Sigma x + 1),
///   m' = m + R (Psi - m^T x) Sigma x,
///   Sigma' = Sigma - R (Sigma x)(Sigma x)^T.
/// A non-finite Psi or S <= 0 carries no information and leaves the belief as is.
template <class Scalar, class Feature>
GaussianBelief<Scalar> apply_pseudo_observation(const GaussianBelief<Scalar>& belief, const Eigen::MatrixBase<Feature>& x,
                                                const PseudoObservation<Scalar>& po)
{
    using std::isfinite;
    if (!(po.weight > Scalar(0)) || !isfinite(po.psi) || !isfinite(po.weight))
        return belief;

    const Vector<Scalar> sx = belief.cov * x;
    const Scalar gain = po.weight / (po.weight * x.dot(sx) + Scalar(1));
    GaussianBelief<Scalar> out;
    out.mean = belief.mean + gain * (po.psi - x.dot(belief.mean)) * sx;
    out.cov = belief.cov - gain * sx * sx.transpose();
    symmetrize(out.cov);
    if (!belief.cov.isZero(Scalar(0)))
        floor_eigenvalues(out.cov, Scalar(kCovarianceFloor));
    return out;
}

/// Filter step for one batch (Woodbury form of the Kalman-on-GLM recursion).
template <class Scalar>
GaussianBelief<Scalar> update_woodbury(const GaussianBelief<Scalar>& belief, const BatchObservation& obs,
                                       const ArmSet<Scalar>& arms, const GlmSpec<Scalar>& spec)
{
    const auto po = pseudo_observation(belief, obs, arms, spec);
    return apply_pseudo_observation(belief, arms.feature(obs.arm), po);
}

/// Approximate variance of Psi^(k) given the belief: (S x^T Sigma x + 1) / S
/// with S = n_k V(m^T x^(k)).
template <class Scalar>
Scalar predictive_psi_variance(const GaussianBelief<Scalar>& belief, const ArmSet<Scalar>& arms,
                               const GlmSpec<Scalar>& spec, Index k)
{
    arms.check_index(k);
    const auto x = arms.feature(k);
    const Scalar s = arms.arrivals(k) * spec.v(x.dot(belief.mean));
    return (s * x.dot(belief.cov * x) + Scalar(1)) / s;
}

template <class Scalar>
void validate_belief(const GaussianBelief<Scalar>& belief)
{
    const Index l = belief.mean.size();
    if (belief.cov.rows() != l || belief.cov.cols() != l)
        throw std::invalid_argument("belief covariance has wrong shape");
    if (!belief.mean.allFinite() || !belief.cov.allFinite())
        throw std::invalid_argument("belief contains non-finite entries");
    if ((belief.cov - belief.cov.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12))
        throw std::invalid_argument("belief covariance is not symmetric");
}

} // namespace arcbandit
