#include "arcbandit/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace arcbandit {

void CalibrationData::validate() const
{
    const auto k = trials.size();
    if (k == 0 || successes.size() != k || static_cast<std::size_t>(features.rows()) != k)
        throw std::invalid_argument("calibration data: mismatched or empty fields");
    for (std::size_t i = 0; i < k; ++i) {
        if (trials[i] < 1)
            throw std::invalid_argument("calibration data: every cell needs at least one trial");
        if (successes[i] < 0 || successes[i] > trials[i])
            throw std::invalid_argument("calibration data: successes must lie in [0, trials]");
    }
}

void MarketPrior::validate() const
{
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw std::invalid_argument("market prior: covariance has wrong shape");
    if (!mean.allFinite() || !cov.allFinite())
        throw std::invalid_argument("market prior: non-finite entries");
    if (!cov.isApprox(cov.transpose()))
        throw std::invalid_argument("market prior: covariance is not symmetric");
}

VectorXd calibration_gradient(const CalibrationData& data, const GlmSpec<double>& spec, const VectorXd& theta)
{
    VectorXd grad = VectorXd::Zero(theta.size());
    for (Index k = 0; k < data.features.rows(); ++k) {
        const auto x = data.features.row(k).transpose();
        const auto i = static_cast<std::size_t>(k);
        grad += (static_cast<double>(data.successes[i]) - static_cast<double>(data.trials[i]) * spec.g1(x.dot(theta))) * x;
    }
    return grad;
}

namespace {

MatrixXd fisher_information(const CalibrationData& data, const GlmSpec<double>& spec, const VectorXd& theta)
{
    const Index l = theta.size();
    MatrixXd info = MatrixXd::Zero(l, l);
    for (Index k = 0; k < data.features.rows(); ++k) {
        const auto x = data.features.row(k).transpose();
        info += static_cast<double>(data.trials[static_cast<std::size_t>(k)]) * spec.g2(x.dot(theta)) * x * x.transpose();
    }
    return info;
}

void require_canonical(const GlmSpec<double>& spec)
{
    for (const double y : {-3.0, -0.5, 0.0, 0.7, 2.5})
        if (spec.phi(y) != y || spec.phi1(y) != 1.0)
            throw std::invalid_argument("calibrate: only canonical (identity) links are supported");
}

} // namespace

MarketPrior calibrate(const CalibrationData& data, const GlmSpec<double>& spec)
{
    data.validate();
    require_canonical(spec);
    const Index l = data.features.cols();
    if (Eigen::FullPivLU<MatrixXd>(data.features).rank() < l)
        throw std::invalid_argument("calibrate: design matrix is rank deficient");

    // scale of the gradient terms, for a relative stopping rule on large counts
    double scale = 0.0;
    for (Index k = 0; k < data.features.rows(); ++k)
        scale += static_cast<double>(data.trials[static_cast<std::size_t>(k)]) * data.features.row(k).norm();

    VectorXd theta = VectorXd::Zero(l);
    for (int it = 0; it < 100; ++it) {
        const VectorXd grad = calibration_gradient(data, spec, theta);
        const MatrixXd info = fisher_information(data, spec, theta);
        const double gnorm = grad.norm();
        if (gnorm < 1e-10 || gnorm < 1e-15 * scale) {
            Eigen::LLT<MatrixXd> llt(info);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error("calibrate: observed information is not positive definite");
            MarketPrior prior{theta, llt.solve(MatrixXd::Identity(l, l))};
            symmetrize(prior.cov);
            return prior;
        }
        Eigen::LLT<MatrixXd> llt(info);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("calibrate: observed information is singular at the current iterate");
        const VectorXd step = llt.solve(grad);
        if (!step.allFinite())
            throw std::runtime_error("calibrate: Newton step is not finite");
        theta += step;
    }
    throw std::runtime_error("calibrate: Newton-Raphson did not converge in 100 iterations");
}

MarketPrior default_market_prior()
{
    MarketPrior p;
    p.mean.resize(2);
    p.mean << -6.42e-1, -4.03e-3;
    p.cov.resize(2, 2);
    p.cov << 1.90e-3, -8.86e-6,
             -8.86e-6, 6.82e-8;
    return p;
}

VectorXd sample_theta(const MarketPrior& prior, Rng& rng)
{
    return sample_gaussian(prior.mean, covariance_factor(prior.cov), rng);
}

DayOutcome simulate_purchases(const VectorXd& theta, Index k, const ArmSet<double>& arms,
                              const GlmSpec<double>& spec, std::int64_t arrivals, Rng& rng)
{
    arms.check_index(k);
    if (arrivals < 0)
        throw std::invalid_argument("simulate: negative arrivals");
    DayOutcome out;
    out.arrivals = arrivals;
    const double p = std::clamp(spec.g1(spec.phi(arms.feature(k).dot(theta))), 0.0, 1.0);
    out.purchases = arrivals == 0 ? 0 : std::binomial_distribution<std::int64_t>(arrivals, p)(rng);
    out.revenue = arms.prices(k) * static_cast<double>(out.purchases);
    return out;
}

DayOutcome simulate_day(const VectorXd& theta, Index k, const ArmSet<double>& arms, const GlmSpec<double>& spec,
                        double arrival_mean, Rng& rng)
{
    if (!(arrival_mean > 0.0))
        throw std::invalid_argument("simulate: arrival mean must be positive");
    const std::int64_t n = std::poisson_distribution<std::int64_t>(arrival_mean)(rng);
    return simulate_purchases(theta, k, arms, spec, n, rng);
}

std::vector<double> pseudo_regret(const VectorXd& theta, const std::vector<Index>& actions,
                                  const ArmSet<double>& arms, const GlmSpec<double>& spec, double arrival_mean)
{
    const Index k_arms = arms.size();
    VectorXd h(k_arms);
    for (Index k = 0; k < k_arms; ++k)
        h(k) = arrival_mean * arms.prices(k) * spec.g1(spec.phi(arms.feature(k).dot(theta)));
    const double best = h.maxCoeff();
    std::vector<double> cum;
    cum.reserve(actions.size());
    double total = 0.0;
    for (const Index a : actions) {
        arms.check_index(a);
        total += best - h(a);
        cum.push_back(total);
    }
    return cum;
}

CalibrationData read_counts_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open counts file: " + path.string());
    std::vector<double> prices;
    CalibrationData data;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::string a, b, c;
        if (!(fields >> a))
            continue;
        if (!(fields >> b >> c))
            throw std::runtime_error("counts file: expected three columns in line '" + line + "'");
        try {
            const double price = std::stod(a);
            const auto trials = static_cast<std::int64_t>(std::stoll(b));
            const auto successes = static_cast<std::int64_t>(std::stoll(c));
            prices.push_back(price);
            data.trials.push_back(trials);
            data.successes.push_back(successes);
        } catch (const std::logic_error&) {
            if (!first)
                throw std::runtime_error("counts file: malformed line '" + line + "'");
        }
        first = false;
    }
    data.features.resize(static_cast<Index>(prices.size()), 2);
    for (std::size_t i = 0; i < prices.size(); ++i)
        data.features.row(static_cast<Index>(i)) << 1.0, prices[i];
    data.validate();
    return data;
}

} // namespace arcbandit
