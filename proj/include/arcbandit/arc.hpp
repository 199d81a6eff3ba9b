#pragma once

#include "arcbandit/belief.hpp"
#include "arcbandit/decision.hpp"
#include "arcbandit/glm.hpp"
#include "arcbandit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace arcbandit {

template <class Scalar>
struct ArcConfig {
    Scalar rho = Scalar(1);
    Scalar beta = Scalar(0.99);
    Scalar fp_tol = Scalar(1e-8);
    int fp_max = 500;
    Scalar damping = Scalar(0.5);

    void validate() const
    {
        if (!(rho > Scalar(0)))
            throw std::invalid_argument("arc: rho must be positive");
        if (!(beta > Scalar(0) && beta < Scalar(1)))
            throw std::invalid_argument("arc: beta must lie in (0, 1)");
        if (!(fp_tol > Scalar(0)))
            throw std::invalid_argument("arc: fixed-point tolerance must be positive");
        if (fp_max < 1)
            throw std::invalid_argument("arc: iteration cap must be at least 1");
        if (!(damping > Scalar(0) && damping <= Scalar(1)))
            throw std::invalid_argument("arc: damping must lie in (0, 1]");
    }
};

template <class Scalar>
struct ArcSolution {
    Vector<Scalar> a;
    Vector<Scalar> nu;
    Scalar lambda = 0;
    Scalar residual = std::numeric_limits<Scalar>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Softmax at temperature lambda, shifted by max(a).
template <class Scalar>
Vector<Scalar> softmax_nu(const Vector<Scalar>& a, Scalar lambda)
{
    if (!(lambda > Scalar(0)))
        throw std::invalid_argument("softmax temperature must be positive");
    const Scalar top = a.maxCoeff();
    Vector<Scalar> e = ((a.array() - top) / lambda).exp().matrix();
    return e / e.sum();
}

/// eta_jk = nu_j (1{j = k} - nu_k), the Jacobian of softmax times lambda.
template <class Scalar>
Matrix<Scalar> softmax_eta(const Vector<Scalar>& nu)
{
    Matrix<Scalar> eta = -nu * nu.transpose();
    eta.diagonal() += nu;
    return eta;
}

template <class Scalar>
Matrix<Scalar> softmax_eta(const Vector<Scalar>& a, Scalar lambda)
{
    return softmax_eta(softmax_nu(a, lambda));
}

/// Immediate expected reward at the posterior mean, f_k = h_k(m^T x^(k)).
template <class Scalar>
Vector<Scalar> f_tilde(const GaussianBelief<Scalar>& belief, const ArmSet<Scalar>& arms, const GlmSpec<Scalar>& spec)
{
    return expected_rewards(arms, spec, belief.mean);
}

/// Randomisation temperature rho * ||Sigma||_F.
template <class Scalar>
Scalar arc_temperature(const GaussianBelief<Scalar>& belief, Scalar rho)
{
    return rho * frobenius_norm(belief.cov);
}

namespace detail {

// Belief-dependent pieces of the learning term; only nu changes between
// fixed-point iterations.
template <class Scalar>
struct LearningModel {
    Vector<Scalar> slope;      // h_j'(m^T x^(j))
    Vector<Scalar> curvature;  // h_j''(m^T x^(j))
    Vector<Scalar> weight;     // w_k = S_k / (S_k x_k^T Sigma x_k + 1), S_k = n_k V(m^T x_k)
    Matrix<Scalar> cross;      // r(k, j) = x^(j)T Sigma x^(k)

    LearningModel(const GaussianBelief<Scalar>& belief, const ArmSet<Scalar>& arms, const GlmSpec<Scalar>& spec)
    {
        const Index k_arms = arms.size();
        const Vector<Scalar> y = arms.features * belief.mean;
        cross = arms.features * belief.cov * arms.features.transpose();
        slope.resize(k_arms);
        curvature.resize(k_arms);
        weight.resize(k_arms);
        for (Index k = 0; k < k_arms; ++k) {
            slope(k) = expected_reward_slope(arms, spec, k, y(k));
            curvature(k) = expected_reward_curvature(arms, spec, k, y(k));
            const Scalar s = arms.arrivals(k) * spec.v(y(k));
            weight(k) = s / (s * cross(k, k) + Scalar(1));
        }
    }

    Vector<Scalar> operator()(const Vector<Scalar>& nu, Scalar lambda) const
    {
        const Index k_arms = slope.size();
        Vector<Scalar> out(k_arms);
        for (Index k = 0; k < k_arms; ++k) {
            const auto r = cross.row(k).transpose();
            const Scalar drift = (nu.array() * curvature.array() * r.array().square()).sum();
            const Vector<Scalar> b = slope.cwiseProduct(r);
            const Scalar centre = nu.dot(b);
            // nu-weighted variance of b, two-pass to avoid cancellation
            const Scalar spread = (nu.array() * (b.array() - centre).square()).sum();
            out(k) = Scalar(0.5) * weight(k) * (drift + spread / lambda);
        }
        return out;
    }

    /// d L_k / d nu_j, up to a per-row constant (which eta annihilates).
    Matrix<Scalar> nu_jacobian(const Vector<Scalar>& nu, Scalar lambda) const
    {
        const Index k_arms = slope.size();
        Matrix<Scalar> d(k_arms, k_arms);
        for (Index k = 0; k < k_arms; ++k) {
            const auto r = cross.row(k).transpose();
            const Vector<Scalar> b = slope.cwiseProduct(r);
            const Scalar centre = nu.dot(b);
            d.row(k) = (Scalar(0.5) * weight(k)
                        * (curvature.array() * r.array().square() + (b.array() - centre).square() / lambda))
                           .matrix()
                           .transpose();
        }
        return d;
    }
};

} // namespace detail

/// Learning term at temperature lambda:
///
///   L_k = 1/2 w_k [ sum_j nu_j h_j'' r_kj^2
///                   + (1/lambda) ( sum_j nu_j (h_j' r_kj)^2 - (sum_j nu_j h_j' r_kj)^2 ) ]
///
/// with nu = softmax(a / lambda) and r_kj = x^(j)T Sigma x^(k).
template <class Scalar>
Vector<Scalar> learning_term(const Vector<Scalar>& a, const GaussianBelief<Scalar>& belief, const ArmSet<Scalar>& arms,
                             const GlmSpec<Scalar>& spec, Scalar lambda)
{
    return detail::LearningModel<Scalar>(belief, arms, spec)(softmax_nu(a, lambda), lambda);
}

namespace detail {

template <class Scalar>
struct FixedPointProblem {
    Vector<Scalar> f;
    LearningModel<Scalar> model;
    Scalar lambda;
    Scalar lookahead;  // beta / (1 - beta)

    Vector<Scalar> map(const Vector<Scalar>& a) const
    {
        return f + lookahead * model(softmax_nu(a, lambda), lambda);
    }

    Scalar residual(const Vector<Scalar>& a) const { return (a - map(a)).template lpNorm<Eigen::Infinity>(); }
};

template <class Scalar>
void keep_best(ArcSolution<Scalar>& best, const Vector<Scalar>& a, Scalar residual)
{
    using std::isfinite;
    if (isfinite(residual) && !(residual >= best.residual)) {
        best.a = a;
        best.residual = residual;
    }
}

template <class Scalar>
bool picard(const FixedPointProblem<Scalar>& p, Scalar damping, const ArcConfig<Scalar>& cfg, ArcSolution<Scalar>& best)
{
    Vector<Scalar> a = p.f;
    for (int it = 0; it < cfg.fp_max; ++it) {
        const Vector<Scalar> t = p.map(a);
        const Scalar res = (a - t).template lpNorm<Eigen::Infinity>();
        ++best.iterations;
        keep_best(best, a, res);
        if (res <= cfg.fp_tol)
            return true;
        if (!t.allFinite())
            return false;
        a = (Scalar(1) - damping) * a + damping * t;
    }
    return false;
}

// Newton on F(a) = a - map(a) with a backtracking line search on ||F||_inf.
// Returns the final residual; `a` holds the final iterate.
template <class Scalar>
Scalar newton_from(const FixedPointProblem<Scalar>& p, Vector<Scalar>& a, Scalar tol, int max_steps, int& counter)
{
    const Index k_arms = p.f.size();
    Scalar res = p.residual(a);
    for (int it = 0; it < max_steps && res > tol; ++it) {
        const Vector<Scalar> nu = softmax_nu(a, p.lambda);
        const Vector<Scalar> residual_vec = a - p.map(a);
        const Matrix<Scalar> jac = Matrix<Scalar>::Identity(k_arms, k_arms)
                                   - (p.lookahead / p.lambda) * p.model.nu_jacobian(nu, p.lambda) * softmax_eta(nu);
        const Vector<Scalar> step = jac.fullPivLu().solve(-residual_vec);
        ++counter;
        if (!step.allFinite())
            break;
        Scalar t = 1;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls, t *= Scalar(0.5)) {
            const Vector<Scalar> trial = a + t * step;
            const Scalar trial_res = p.residual(trial);
            if (trial_res < res) {
                a = trial;
                res = trial_res;
                moved = true;
                break;
            }
        }
        if (!moved)
            break;
    }
    return res;
}

template <class Scalar>
bool newton(const FixedPointProblem<Scalar>& p, const ArcConfig<Scalar>& cfg, ArcSolution<Scalar>& best)
{
    Vector<Scalar> a = best.a;
    const Scalar res = newton_from(p, a, cfg.fp_tol, cfg.fp_max, best.iterations);
    keep_best(best, a, res);
    return res <= cfg.fp_tol;
}

// Continuation in the lookahead weight: follow the solution branch from
// a = f (zero lookahead) to the full weight, polishing with Newton each step.
template <class Scalar>
bool continuation(const FixedPointProblem<Scalar>& p, const ArcConfig<Scalar>& cfg, ArcSolution<Scalar>& best)
{
    constexpr int steps = 32;
    FixedPointProblem<Scalar> q = p;
    Vector<Scalar> a = p.f;
    Scalar res = 0;
    for (int i = 1; i <= steps; ++i) {
        q.lookahead = p.lookahead * Scalar(i) / Scalar(steps);
        res = newton_from(q, a, cfg.fp_tol, 50, best.iterations);
        if (!a.allFinite())
            return false;
    }
    res = newton_from(p, a, cfg.fp_tol, cfg.fp_max, best.iterations);
    keep_best(best, a, res);
    return res <= cfg.fp_tol;
}

} // namespace detail

/// Solves a = f + beta/(1-beta) L^lambda(a) with lambda = rho ||Sigma||_F.
///
/// Damped Picard iteration from a = f; on failure the damping is halved once
/// and the iteration restarted, then Newton steps polish the best iterate,
/// and finally the solution is continued in the lookahead weight from zero.
/// If nothing reaches fp_tol the best iterate is returned with
/// converged = false.
template <class Scalar>
ArcSolution<Scalar> solve_fixed_point(const GaussianBelief<Scalar>& belief, const ArmSet<Scalar>& arms,
                                      const GlmSpec<Scalar>& spec, const ArcConfig<Scalar>& cfg)
{
    cfg.validate();
    const Scalar lambda = arc_temperature(belief, cfg.rho);
    if (!(lambda > Scalar(0)))
        throw std::invalid_argument("arc: temperature is zero (degenerate covariance)");

    const detail::FixedPointProblem<Scalar> problem{f_tilde(belief, arms, spec),
                                                    detail::LearningModel<Scalar>(belief, arms, spec), lambda,
                                                    cfg.beta / (Scalar(1) - cfg.beta)};

    ArcSolution<Scalar> sol;
    sol.lambda = lambda;
    sol.a = problem.f;
    sol.converged = detail::picard(problem, cfg.damping, cfg, sol)
                    || detail::picard(problem, cfg.damping / Scalar(2), cfg, sol)
                    || detail::newton(problem, cfg, sol) || detail::continuation(problem, cfg, sol);
    sol.nu = softmax_nu(sol.a, lambda);
    return sol;
}

/// Greedy one-hot on the posterior-mean rewards, lowest index on ties.
template <class Scalar>
PolicyDecision<Scalar> greedy_decision(const GaussianBelief<Scalar>& belief, const ArmSet<Scalar>& arms,
                                       const GlmSpec<Scalar>& spec)
{
    return one_hot_decision<Scalar>(arms.size(), argmax_lowest(f_tilde(belief, arms, spec)));
}

/// ARC decision: nu^lambda(a) at the solved fixed point, arm drawn with zeta.
/// An exactly zero covariance has no temperature and reduces to greedy.
template <class Scalar>
PolicyDecision<Scalar> arc_select(const GaussianBelief<Scalar>& belief, const ArmSet<Scalar>& arms,
                                  const GlmSpec<Scalar>& spec, const ArcConfig<Scalar>& cfg, Scalar zeta,
                                  ArcSolution<Scalar>* solution = nullptr)
{
    if (belief.cov.isZero(Scalar(0))) {
        auto d = greedy_decision(belief, arms, spec);
        if (solution) {
            *solution = ArcSolution<Scalar>{};
            solution->a = f_tilde(belief, arms, spec);
            solution->nu = d.probs;
            solution->residual = 0;
            solution->converged = true;
        }
        return d;
    }
    ArcSolution<Scalar> sol = solve_fixed_point(belief, arms, spec, cfg);
    if (!sol.a.allFinite() || !sol.nu.allFinite())
        throw std::runtime_error("arc: fixed-point solve produced non-finite values");
    auto d = randomised_decision<Scalar>(sol.nu, zeta);
    if (solution)
        *solution = std::move(sol);
    return d;
}

} // namespace arcbandit
