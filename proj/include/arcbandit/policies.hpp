#pragma once

#include "arcbandit/arc.hpp"
#include "arcbandit/belief.hpp"
#include "arcbandit/decision.hpp"
#include "arcbandit/glm.hpp"
#include "arcbandit/rng.hpp"

#include <cstdint>
#include <vector>

namespace arcbandit {

using Belief = GaussianBelief<double>;
using Arms = ArmSet<double>;
using Spec = GlmSpec<double>;
using Decision = PolicyDecision<double>;

/// Per-arm running statistics of per-customer revenue, for the frequentist
/// UCB variants that ignore the shared parameter.
struct IndependentArmStats {
    std::vector<std::int64_t> pulls;
    std::vector<double> mean_reward;
    std::vector<double> mean_sq;

    explicit IndependentArmStats(Index k_arms = 0)
        : pulls(k_arms, 0)
        , mean_reward(k_arms, 0.0)
        , mean_sq(k_arms, 0.0)
    {
    }

    void record(Index arm, double reward);
};

Decision epsilon_greedy(const Belief& belief, const Arms& arms, const Spec& spec, double eps, double zeta);

/// Uniform for t <= floor(eps T), greedy afterwards. t is 1-based.
Decision explore_then_commit(const Belief& belief, const Arms& arms, const Spec& spec, int t, int horizon, double eps,
                             double zeta);

Decision thompson(const Belief& belief, const Arms& arms, const Spec& spec, Rng& rng);

/// Quantile level 1 - 1/(t (log T)^c), clamped to [1e-12, 1 - 1e-12].
double bayes_ucb_level(int t, int horizon, double c);

Decision bayes_ucb(const Belief& belief, const Arms& arms, const Spec& spec, int t, int horizon, double c);

/// Monte-Carlo estimate of E[max_j h_j(M'^T x^(j)) | A = k] for every arm, with
/// common random numbers across arms.
VectorXd kg_lookahead_values(const Belief& belief, const Arms& arms, const Spec& spec, Rng& rng, int n_mc);

Decision knowledge_gradient(const Belief& belief, const Arms& arms, const Spec& spec, double beta, Rng& rng,
                            int n_mc);

struct IdsInputs {
    VectorXd regret;  // expected single-step regret Delta_k
    VectorXd gain;    // information gain g_k
};

IdsInputs ids_inputs(const Belief& belief, const Arms& arms, const Spec& spec, Rng& rng, int n_mc);

/// argmin over the simplex of (u.Delta)^2 / (u.g), searched over arm pairs.
VectorXd ids_distribution(const VectorXd& regret, const VectorXd& gain);

Decision ids(const Belief& belief, const Arms& arms, const Spec& spec, Rng& rng, int n_mc, double zeta);

/// Index of UCB1 on per-customer revenue in [0, c_k].
double ucb1_index(const IndependentArmStats& stats, const Arms& arms, Index k, int t);
double ucb_tuned_index(const IndependentArmStats& stats, const Arms& arms, Index k, int t);

Decision ucb1(const IndependentArmStats& stats, const Arms& arms, int t);
Decision ucb_tuned(const IndependentArmStats& stats, const Arms& arms, int t);

} // namespace arcbandit
