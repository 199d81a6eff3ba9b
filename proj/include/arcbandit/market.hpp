#pragma once

#include "arcbandit/glm.hpp"
#include "arcbandit/linalg.hpp"
#include "arcbandit/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace arcbandit {

/// Aggregate historical counts per price cell.
struct CalibrationData {
    std::vector<std::int64_t> trials;
    std::vector<std::int64_t> successes;
    MatrixXd features;  // one row per cell

    void validate() const;
};

/// Gaussian law the hidden parameter is drawn from.
struct MarketPrior {
    VectorXd mean;
    MatrixXd cov;

    void validate() const;
};

struct DayOutcome {
    std::int64_t arrivals = 0;
    std::int64_t purchases = 0;
    double revenue = 0.0;
};

/// Laplace approximation of the posterior under a flat prior: Newton-Raphson
/// for the maximum likelihood estimate, covariance the inverse observed Fisher
/// information sum_k r_k G''(theta^T x_k) x_k x_k^T. Canonical link only.
MarketPrior calibrate(const CalibrationData& data, const GlmSpec<double>& spec);

/// Log-likelihood gradient sum_k (s_k - r_k G'(theta^T x_k)) x_k.
VectorXd calibration_gradient(const CalibrationData& data, const GlmSpec<double>& spec, const VectorXd& theta);

/// Laplace posterior fitted to a historical price experiment.
MarketPrior default_market_prior();

VectorXd sample_theta(const MarketPrior& prior, Rng& rng);

/// Purchases ~ Binomial(arrivals, G'(phi(theta^T x^(k)))).
DayOutcome simulate_purchases(const VectorXd& theta, Index k, const ArmSet<double>& arms,
                              const GlmSpec<double>& spec, std::int64_t arrivals, Rng& rng);

/// Arrivals ~ Poisson(arrival_mean), then purchases as above.
DayOutcome simulate_day(const VectorXd& theta, Index k, const ArmSet<double>& arms, const GlmSpec<double>& spec,
                        double arrival_mean, Rng& rng);

/// Cumulative pseudo-regret sum_t max_k h_k(theta) - h_{A_t}(theta) with n = arrival_mean.
std::vector<double> pseudo_regret(const VectorXd& theta, const std::vector<Index>& actions,
                                  const ArmSet<double>& arms, const GlmSpec<double>& spec, double arrival_mean);

/// Reads "price, trials, successes" rows; '#' starts a comment and a
/// non-numeric first line is treated as a header.
CalibrationData read_counts_file(const std::filesystem::path& path);

} // namespace arcbandit
