#pragma once

#include "arcbandit/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace arcbandit {

/// Randomised choice u in the simplex together with the arm drawn from it.
template <class Scalar>
struct PolicyDecision {
    Vector<Scalar> probs;
    Index arm = 0;
};

/// Inverse-CDF draw: the first arm whose cumulative probability reaches zeta.
/// Zero-probability arms are never returned.
template <class Scalar>
Index sample_arm(const Vector<Scalar>& probs, Scalar zeta)
{
    if (probs.size() == 0)
        throw std::invalid_argument("empty probability vector");
    Scalar cum = 0;
    Index last_positive = 0;
    for (Index k = 0; k < probs.size(); ++k) {
        if (probs(k) <= Scalar(0))
            continue;
        last_positive = k;
        cum += probs(k);
        if (cum >= zeta)
            return k;
    }
    return last_positive;
}

template <class Scalar>
PolicyDecision<Scalar> one_hot_decision(Index k_arms, Index arm)
{
    PolicyDecision<Scalar> d;
    d.probs = Vector<Scalar>::Zero(k_arms);
    d.probs(arm) = Scalar(1);
    d.arm = arm;
    return d;
}

template <class Scalar>
PolicyDecision<Scalar> randomised_decision(Vector<Scalar> probs, Scalar zeta)
{
    PolicyDecision<Scalar> d;
    d.arm = sample_arm(probs, zeta);
    d.probs = std::move(probs);
    return d;
}

template <class Scalar>
bool in_simplex(const Vector<Scalar>& probs, Scalar tol = Scalar(1e-12))
{
    using std::abs;
    return (probs.array() >= Scalar(0)).all() && abs(probs.sum() - Scalar(1)) <= tol;
}

} // namespace arcbandit
