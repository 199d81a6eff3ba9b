#pragma once

#include "arcbandit/linalg.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace arcbandit {

/// Exponential-family observation channel
///
///     Q | Theta ~ h(q) exp(phi(Theta^T x) q - G(phi(Theta^T x)))
///
/// carried as a bundle of scalar maps so that belief and policy code never
/// depend on a particular family. psi is the inverse of G' o phi, and
/// v(y) = G''(phi(y)) phi'(y)^2 is the inverse asymptotic variance of psi
/// applied to a batch mean.
template <class Scalar>
struct GlmSpec {
    using Fn = std::function<Scalar(Scalar)>;

    Fn g;     // G
    Fn g1;    // G'
    Fn g2;    // G''
    Fn g3;    // G'''
    Fn phi;
    Fn phi1;
    Fn phi2;
    Fn psi;   // (G' o phi)^{-1}
    Fn psi1;  // psi'
    Fn v;
};

namespace logistic {

template <class Scalar>
Scalar sigmoid(Scalar z)
{
    using std::exp;
    if (z >= Scalar(0))
        return Scalar(1) / (Scalar(1) + exp(-z));
    const Scalar e = exp(z);
    return e / (Scalar(1) + e);
}

/// log(1 + e^z) without overflow.
template <class Scalar>
Scalar log1pexp(Scalar z)
{
    using std::exp;
    using std::log1p;
    if (z > Scalar(0))
        return z + log1p(exp(-z));
    return log1p(exp(z));
}

template <class Scalar>
Scalar logit(Scalar p)
{
    using std::log;
    using std::log1p;
    return log(p) - log1p(-p);
}

/// sigma(z)(1 - sigma(z)); both factors are evaluated directly so the
/// product keeps full relative precision in the tails.
template <class Scalar>
Scalar variance(Scalar z)
{
    return sigmoid(z) * sigmoid(-z);
}

template <class Scalar>
Scalar third_derivative(Scalar z)
{
    return sigmoid(z) * sigmoid(-z) * (sigmoid(-z) - sigmoid(z));
}

} // namespace logistic

/// Bernoulli observations with canonical (identity) link.
template <class Scalar = double>
GlmSpec<Scalar> logistic_spec()
{
    GlmSpec<Scalar> s;
    s.g = [](Scalar z) { return logistic::log1pexp(z); };
    s.g1 = [](Scalar z) { return logistic::sigmoid(z); };
    s.g2 = [](Scalar z) { return logistic::variance(z); };
    s.g3 = [](Scalar z) { return logistic::third_derivative(z); };
    s.phi = [](Scalar y) { return y; };
    s.phi1 = [](Scalar) { return Scalar(1); };
    s.phi2 = [](Scalar) { return Scalar(0); };
    s.psi = [](Scalar p) { return logistic::logit(p); };
    s.psi1 = [](Scalar p) { return Scalar(1) / (p * (Scalar(1) - p)); };
    s.v = [](Scalar y) { return logistic::variance(y); };
    return s;
}

/// K arms: features x^(k) as rows, prices c_k and expected daily arrivals n_k.
template <class Scalar>
struct ArmSet {
    Matrix<Scalar> features;
    Vector<Scalar> prices;
    Vector<Scalar> arrivals;

    Index size() const { return prices.size(); }
    Index dim() const { return features.cols(); }
    auto feature(Index k) const { return features.row(k).transpose(); }

    void validate() const
    {
        const Index k = prices.size();
        if (k < 1)
            throw std::invalid_argument("arm set must contain at least one arm");
        if (features.rows() != k || arrivals.size() != k)
            throw std::invalid_argument("arm set fields have mismatched lengths");
        if ((prices.array() <= Scalar(0)).any() || (arrivals.array() <= Scalar(0)).any())
            throw std::invalid_argument("prices and arrivals must be positive");
        for (Index i = 0; i < k; ++i)
            for (Index j = i + 1; j < k; ++j)
                if (features.row(i) == features.row(j))
                    throw std::invalid_argument("arm features must be pairwise distinct");
    }

    void check_index(Index k) const
    {
        if (k < 0 || k >= size())
            throw std::out_of_range("arm index " + std::to_string(k) + " out of range");
    }
};

/// Pricing arms x^(k) = (1, c_k) with a common arrival rate.
template <class Scalar>
ArmSet<Scalar> pricing_arms(const Vector<Scalar>& prices, Scalar arrival_mean)
{
    ArmSet<Scalar> arms;
    arms.prices = prices;
    arms.arrivals = Vector<Scalar>::Constant(prices.size(), arrival_mean);
    arms.features.resize(prices.size(), 2);
    arms.features.col(0).setOnes();
    arms.features.col(1) = prices;
    arms.validate();
    return arms;
}

/// h_k(y) = n_k c_k G'(phi(y)).
template <class Scalar>
Scalar expected_reward(const ArmSet<Scalar>& arms, const GlmSpec<Scalar>& spec, Index k, Scalar y)
{
    arms.check_index(k);
    return arms.arrivals(k) * arms.prices(k) * spec.g1(spec.phi(y));
}

/// h_k'(y).
template <class Scalar>
Scalar expected_reward_slope(const ArmSet<Scalar>& arms, const GlmSpec<Scalar>& spec, Index k, Scalar y)
{
    arms.check_index(k);
    return arms.arrivals(k) * arms.prices(k) * spec.g2(spec.phi(y)) * spec.phi1(y);
}

/// h_k''(y).
template <class Scalar>
Scalar expected_reward_curvature(const ArmSet<Scalar>& arms, const GlmSpec<Scalar>& spec, Index k, Scalar y)
{
    arms.check_index(k);
    const Scalar f = spec.phi(y);
    const Scalar d1 = spec.phi1(y);
    return arms.arrivals(k) * arms.prices(k) * (spec.g3(f) * d1 * d1 + spec.g2(f) * spec.phi2(y));
}

/// Vector of h_k(theta^T x^(k)) over all arms.
template <class Scalar>
Vector<Scalar> expected_rewards(const ArmSet<Scalar>& arms, const GlmSpec<Scalar>& spec, const Vector<Scalar>& theta)
{
    const Vector<Scalar> y = arms.features * theta;
    Vector<Scalar> h(arms.size());
    for (Index k = 0; k < arms.size(); ++k)
        h(k) = expected_reward(arms, spec, k, y(k));
    return h;
}

} // namespace arcbandit
