#pragma once

#include "arcbandit/arc.hpp"
#include "arcbandit/config.hpp"
#include "arcbandit/linalg.hpp"
#include "arcbandit/market.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace arcbandit {

enum class AlgoKind { arc, greedy, egreedy, etc, ts, bayes_ucb, kg, ids, ucb, ucb_tuned };

AlgoKind parse_algo(const std::string& name);
std::string algo_name(AlgoKind kind);
const std::vector<std::string>& known_algos();

/// Policy hyperparameters. `beta` is the discount shared by ARC and KG; unset
/// means 1 - 1/days.
struct PolicyParams {
    ArcConfig<double> arc;
    std::optional<double> beta;
    double egreedy_eps = 0.05;
    double etc_eps = 0.1;
    double bayes_ucb_c = 0.0;
    int kg_n_mc = 64;
    int ids_n_mc = 512;
};

struct ExperimentConfig {
    std::vector<std::string> algos;
    int days = 365;
    int replications = 5000;
    std::uint64_t master_seed = 1;
    VectorXd prior_m0;
    MatrixXd prior_sigma0;
    MarketPrior market;
    VectorXd prices;
    double arrival_mean = 270.0;
    PolicyParams params;
    bool write_trace = true;

    double discount() const;
    ArcConfig<double> arc_config() const;
    void validate() const;
};

/// Illustrative ten-point price grid in dollars.
VectorXd example_price_grid();

/// Built-in defaults: every policy, 365 days, 5000 replications, m0 = 0,
/// Sigma0 = I, the fitted market prior, the example grid, 270 arrivals/day.
ExperimentConfig default_experiment_config();

/// Applies key-value entries on top of `cfg`. Relative file paths resolve
/// against `base_dir`. Unknown keys are rejected.
void apply_key_values(ExperimentConfig& cfg, const KeyValues& kv, const std::filesystem::path& base_dir = {});

/// Inverse of apply_key_values for the reproducible fields.
KeyValues to_key_values(const ExperimentConfig& cfg);

struct DayRecord {
    int day = 0;
    Index arm = 0;
    double revenue = 0.0;
    double cum_regret = 0.0;
};

struct RegretTrace {
    int replication = 0;
    std::string algo;
    std::vector<DayRecord> per_day;
    int switches = 0;
    int solver_failures = 0;  // ARC solves that stopped above tolerance
};

int count_switches(const std::vector<DayRecord>& days);

RegretTrace run_replication(const ExperimentConfig& cfg, const std::string& algo, int replication);

/// All (algo, replication) pairs, sorted by (algo, replication). Output does
/// not depend on the thread count.
std::vector<RegretTrace> run_grid(const ExperimentConfig& cfg, int threads);

struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> median;
    std::vector<double> q75;
    std::vector<double> q90;
};

struct AlgoSummary {
    int replications = 0;
    SeriesStats regret;    // cumulative pseudo-regret per day
    SeriesStats switches;  // cumulative price changes per day
};

using Summary = std::map<std::string, AlgoSummary>;

/// Lower quantile: the element at floor(q (n - 1)) of the sorted values.
double lower_quantile(const std::vector<double>& sorted, double q);

Summary aggregate(const std::vector<RegretTrace>& traces);

} // namespace arcbandit
