#include "arcbandit/policies.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>

namespace arcbandit {

void IndependentArmStats::record(Index arm, double reward)
{
    const auto k = static_cast<std::size_t>(arm);
    const double n = static_cast<double>(++pulls[k]);
    mean_reward[k] += (reward - mean_reward[k]) / n;
    mean_sq[k] += (reward * reward - mean_sq[k]) / n;
}

namespace {

VectorXd uniform_probs(Index k_arms)
{
    return VectorXd::Constant(k_arms, 1.0 / static_cast<double>(k_arms));
}

Decision argmax_decision(const VectorXd& score)
{
    return one_hot_decision<double>(score.size(), argmax_lowest(score));
}

} // namespace

Decision epsilon_greedy(const Belief& belief, const Arms& arms, const Spec& spec, double eps, double zeta)
{
    if (!(eps >= 0.0 && eps <= 1.0))
        throw std::invalid_argument("epsilon-greedy: eps must lie in [0, 1]");
    const Index k_arms = arms.size();
    VectorXd probs = eps * uniform_probs(k_arms);
    probs(argmax_lowest(f_tilde(belief, arms, spec))) += 1.0 - eps;
    return randomised_decision<double>(std::move(probs), zeta);
}

Decision explore_then_commit(const Belief& belief, const Arms& arms, const Spec& spec, int t, int horizon, double eps,
                             double zeta)
{
    if (t < 1 || t > horizon)
        throw std::invalid_argument("explore-then-commit: t must lie in [1, T]");
    const auto explore_days = static_cast<int>(std::floor(eps * static_cast<double>(horizon)));
    if (t <= explore_days)
        return randomised_decision<double>(uniform_probs(arms.size()), zeta);
    return greedy_decision(belief, arms, spec);
}

Decision thompson(const Belief& belief, const Arms& arms, const Spec& spec, Rng& rng)
{
    const VectorXd theta = sample_gaussian(belief.mean, covariance_factor(belief.cov), rng);
    return argmax_decision(expected_rewards(arms, spec, theta));
}

double bayes_ucb_level(int t, int horizon, double c)
{
    if (t < 1 || horizon < 2)
        throw std::invalid_argument("bayes-ucb: need t >= 1 and T >= 2");
    const double p = 1.0 - 1.0 / (static_cast<double>(t) * std::pow(std::log(static_cast<double>(horizon)), c));
    return std::clamp(p, 1e-12, 1.0 - 1e-12);
}

Decision bayes_ucb(const Belief& belief, const Arms& arms, const Spec& spec, int t, int horizon, double c)
{
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), bayes_ucb_level(t, horizon, c));
    VectorXd score(arms.size());
    for (Index k = 0; k < arms.size(); ++k) {
        const auto x = arms.feature(k);
        const double sd = std::sqrt(std::max(0.0, x.dot(belief.cov * x)));
        score(k) = expected_reward(arms, spec, k, x.dot(belief.mean) + z * sd);
    }
    return argmax_decision(score);
}

VectorXd kg_lookahead_values(const Belief& belief, const Arms& arms, const Spec& spec, Rng& rng, int n_mc)
{
    if (n_mc < 1)
        throw std::invalid_argument("knowledge gradient: n_mc must be positive");
    const Index k_arms = arms.size();
    const MatrixXd factor = covariance_factor(belief.cov);
    VectorXd values = VectorXd::Zero(k_arms);
    for (int s = 0; s < n_mc; ++s) {
        const VectorXd theta = sample_gaussian(belief.mean, factor, rng);
        const std::uint64_t arrival_seed = rng();
        const std::uint64_t purchase_seed = rng();
        for (Index k = 0; k < k_arms; ++k) {
            // Same theta, arrival stream and purchase stream for every arm.
            const double p = spec.g1(spec.phi(arms.feature(k).dot(theta)));
            Rng arrival_rng(arrival_seed);
            const std::int64_t n = std::poisson_distribution<std::int64_t>(arms.arrivals(k))(arrival_rng);
            Belief next = belief;
            if (n > 0) {
                Rng purchase_rng(purchase_seed);
                std::binomial_distribution<std::int64_t> buys(n, std::clamp(p, 0.0, 1.0));
                next = update_woodbury(belief, BatchObservation{n, buys(purchase_rng), k}, arms, spec);
            }
            values(k) += f_tilde(next, arms, spec).maxCoeff();
        }
    }
    return values / static_cast<double>(n_mc);
}

Decision knowledge_gradient(const Belief& belief, const Arms& arms, const Spec& spec, double beta, Rng& rng, int n_mc)
{
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("knowledge gradient: beta must lie in (0, 1)");
    const VectorXd lookahead = kg_lookahead_values(belief, arms, spec, rng, n_mc);
    return argmax_decision(f_tilde(belief, arms, spec) + (beta / (1.0 - beta)) * lookahead);
}

IdsInputs ids_inputs(const Belief& belief, const Arms& arms, const Spec& spec, Rng& rng, int n_mc)
{
    if (n_mc < 1)
        throw std::invalid_argument("ids: n_mc must be positive");
    const Index k_arms = arms.size();
    const MatrixXd factor = covariance_factor(belief.cov);
    IdsInputs in{VectorXd::Zero(k_arms), VectorXd::Zero(k_arms)};
    for (int s = 0; s < n_mc; ++s) {
        const VectorXd h = expected_rewards(arms, spec, sample_gaussian(belief.mean, factor, rng));
        in.regret += (VectorXd::Constant(k_arms, h.maxCoeff()) - h);
    }
    in.regret /= static_cast<double>(n_mc);
    for (Index k = 0; k < k_arms; ++k) {
        const auto x = arms.feature(k);
        const double s = arms.arrivals(k) * spec.v(x.dot(belief.mean));
        in.gain(k) = 0.5 * std::log1p(s * std::max(0.0, x.dot(belief.cov * x)));
    }
    return in;
}

namespace {

double information_ratio(double regret, double gain)
{
    if (regret <= 0.0)
        return 0.0;
    if (gain <= 0.0)
        return std::numeric_limits<double>::infinity();
    return regret * regret / gain;
}

} // namespace

VectorXd ids_distribution(const VectorXd& regret, const VectorXd& gain)
{
    const Index k_arms = regret.size();
    if (gain.size() != k_arms || k_arms == 0)
        throw std::invalid_argument("ids: regret and gain must have equal nonzero length");
    if (k_arms == 1)
        return VectorXd::Ones(1);

    VectorXd best = VectorXd::Zero(k_arms);
    double best_ratio = std::numeric_limits<double>::infinity();
    Index best_i = 0;
    Index best_j = 0;
    double best_q = 1.0;

    const auto consider = [&](Index i, Index j, double q) {
        const double r = q * regret(i) + (1.0 - q) * regret(j);
        const double g = q * gain(i) + (1.0 - q) * gain(j);
        const double ratio = information_ratio(r, g);
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best_i = i;
            best_j = j;
            best_q = q;
        }
    };

    for (Index i = 0; i < k_arms; ++i) {
        consider(i, i, 1.0);
        for (Index j = i + 1; j < k_arms; ++j) {
            // q weights arm i; the stationary point of (D(q))^2 / G(q) on the segment
            const double da = regret(i) - regret(j);
            const double db = gain(i) - gain(j);
            if (da != 0.0 && db != 0.0) {
                const double q = (regret(j) * db - 2.0 * da * gain(j)) / (da * db);
                if (q > 0.0 && q < 1.0)
                    consider(i, j, q);
            }
        }
    }

    const bool all_zero_regret = (regret.array() <= 0.0).all();
    const bool no_gain = (gain.array() <= 0.0).all();
    if (!std::isfinite(best_ratio) || all_zero_regret || no_gain) {
        // greedy fallback: least expected regret
        Index k = 0;
        for (Index i = 1; i < k_arms; ++i)
            if (regret(i) < regret(k))
                k = i;
        best.setZero();
        best(k) = 1.0;
        return best;
    }
    best(best_i) += best_q;
    best(best_j) += 1.0 - best_q;
    return best;
}

Decision ids(const Belief& belief, const Arms& arms, const Spec& spec, Rng& rng, int n_mc, double zeta)
{
    if (arms.size() == 1)
        return one_hot_decision<double>(1, 0);
    const IdsInputs in = ids_inputs(belief, arms, spec, rng, n_mc);
    const bool all_zero_regret = (in.regret.array() <= 0.0).all();
    const bool no_gain = (in.gain.array() <= 0.0).all();
    if (all_zero_regret || no_gain)
        return greedy_decision(belief, arms, spec);
    return randomised_decision<double>(ids_distribution(in.regret, in.gain), zeta);
}

namespace {

std::optional<Index> first_unpulled(const IndependentArmStats& stats)
{
    for (std::size_t k = 0; k < stats.pulls.size(); ++k)
        if (stats.pulls[k] == 0)
            return static_cast<Index>(k);
    return std::nullopt;
}

void check_stats(const IndependentArmStats& stats, const Arms& arms, int t)
{
    if (t < 1)
        throw std::invalid_argument("ucb: t must be at least 1");
    if (static_cast<Index>(stats.pulls.size()) != arms.size())
        throw std::invalid_argument("ucb: statistics do not match the arm set");
}

template <class IndexFn>
Decision ucb_decision(const IndependentArmStats& stats, const Arms& arms, int t, IndexFn index)
{
    check_stats(stats, arms, t);
    if (const auto k = first_unpulled(stats))
        return one_hot_decision<double>(arms.size(), *k);
    VectorXd score(arms.size());
    for (Index k = 0; k < arms.size(); ++k)
        score(k) = index(stats, arms, k, t);
    return argmax_decision(score);
}

} // namespace

double ucb1_index(const IndependentArmStats& stats, const Arms& arms, Index k, int t)
{
    const auto i = static_cast<std::size_t>(k);
    const double n = static_cast<double>(stats.pulls[i]);
    return stats.mean_reward[i] + arms.prices(k) * std::sqrt(2.0 * std::log(static_cast<double>(t)) / n);
}

double ucb_tuned_index(const IndependentArmStats& stats, const Arms& arms, Index k, int t)
{
    const auto i = static_cast<std::size_t>(k);
    const double n = static_cast<double>(stats.pulls[i]);
    const double c = arms.prices(k);
    const double log_t = std::log(static_cast<double>(t));
    const double mean = stats.mean_reward[i] / c;
    const double variance = std::max(0.0, stats.mean_sq[i] / (c * c) - mean * mean);
    const double v_bar = variance + std::sqrt(2.0 * log_t / n);
    return stats.mean_reward[i] + c * std::sqrt(log_t / n * std::min(0.25, v_bar));
}

Decision ucb1(const IndependentArmStats& stats, const Arms& arms, int t)
{
    return ucb_decision(stats, arms, t, ucb1_index);
}

Decision ucb_tuned(const IndependentArmStats& stats, const Arms& arms, int t)
{
    return ucb_decision(stats, arms, t, ucb_tuned_index);
}

} // namespace arcbandit
