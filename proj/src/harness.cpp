#include "arcbandit/harness.hpp"

#include "arcbandit/belief.hpp"
#include "arcbandit/glm.hpp"
#include "arcbandit/policies.hpp"
#include "arcbandit/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace arcbandit {

namespace {

const std::vector<std::pair<std::string, AlgoKind>>& algo_table()
{
    static const std::vector<std::pair<std::string, AlgoKind>> table{
        {"arc", AlgoKind::arc},       {"greedy", AlgoKind::greedy},       {"egreedy", AlgoKind::egreedy},
        {"etc", AlgoKind::etc},       {"ts", AlgoKind::ts},               {"bayes_ucb", AlgoKind::bayes_ucb},
        {"kg", AlgoKind::kg},         {"ids", AlgoKind::ids},             {"ucb", AlgoKind::ucb},
        {"ucb_tuned", AlgoKind::ucb_tuned},
    };
    return table;
}

bool uses_belief(AlgoKind kind)
{
    return kind != AlgoKind::ucb && kind != AlgoKind::ucb_tuned;
}

} // namespace

AlgoKind parse_algo(const std::string& name)
{
    for (const auto& [key, kind] : algo_table())
        if (key == name)
            return kind;
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string algo_name(AlgoKind kind)
{
    for (const auto& [key, k] : algo_table())
        if (k == kind)
            return key;
    return "?";
}

const std::vector<std::string>& known_algos()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& entry : algo_table())
            out.push_back(entry.first);
        return out;
    }();
    return names;
}

double ExperimentConfig::discount() const
{
    return params.beta ? *params.beta : 1.0 - 1.0 / static_cast<double>(days);
}

ArcConfig<double> ExperimentConfig::arc_config() const
{
    ArcConfig<double> c = params.arc;
    c.beta = discount();
    return c;
}

void ExperimentConfig::validate() const
{
    if (days < 1)
        throw std::invalid_argument("config: days must be at least 1");
    if (replications < 1)
        throw std::invalid_argument("config: replications must be at least 1");
    if (algos.empty())
        throw std::invalid_argument("config: no algorithms selected");
    for (const auto& a : algos)
        parse_algo(a);
    if (prices.size() < 1)
        throw std::invalid_argument("config: price grid is empty");
    if (!(arrival_mean > 0.0))
        throw std::invalid_argument("config: arrival_mean must be positive");
    if (prior_m0.size() != 2 || prior_sigma0.rows() != 2 || prior_sigma0.cols() != 2)
        throw std::invalid_argument("config: pricing prior must be two-dimensional");
    if (!prior_sigma0.isApprox(prior_sigma0.transpose()))
        throw std::invalid_argument("config: prior_sigma0 must be symmetric");
    try {
        covariance_factor(prior_sigma0);
    } catch (const std::runtime_error&) {
        throw std::invalid_argument("config: prior_sigma0 must be positive semidefinite");
    }
    market.validate();
    if (market.mean.size() != 2)
        throw std::invalid_argument("config: market prior must be two-dimensional");
    pricing_arms<double>(prices, arrival_mean);
    if (days < 2 && std::find(algos.begin(), algos.end(), "bayes_ucb") != algos.end())
        throw std::invalid_argument("config: bayes_ucb needs days >= 2");
    if (!(params.egreedy_eps >= 0.0 && params.egreedy_eps <= 1.0) || !(params.etc_eps >= 0.0 && params.etc_eps <= 1.0))
        throw std::invalid_argument("config: epsilon values must lie in [0, 1]");
    if (params.kg_n_mc < 1 || params.ids_n_mc < 1)
        throw std::invalid_argument("config: Monte-Carlo sample counts must be positive");
    arc_config().validate();
}

VectorXd example_price_grid()
{
    VectorXd p(10);
    p << 19, 39, 59, 79, 99, 159, 199, 249, 299, 399;
    return p;
}

ExperimentConfig default_experiment_config()
{
    ExperimentConfig cfg;
    cfg.algos = {"arc", "egreedy", "etc", "ts", "bayes_ucb", "kg", "ids", "ucb", "ucb_tuned"};
    cfg.prior_m0 = VectorXd::Zero(2);
    cfg.prior_sigma0 = MatrixXd::Identity(2, 2);
    cfg.market = default_market_prior();
    cfg.prices = example_price_grid();
    return cfg;
}

void apply_key_values(ExperimentConfig& cfg, const KeyValues& kv, const std::filesystem::path& base_dir)
{
    const auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    bool inline_market = false;
    for (const auto& [key, value] : kv) {
        if (key == "algos")
            cfg.algos = parse_word_list(value);
        else if (key == "days")
            cfg.days = static_cast<int>(parse_integer(value));
        else if (key == "replications" || key == "sims")
            cfg.replications = static_cast<int>(parse_integer(value));
        else if (key == "seed")
            cfg.master_seed = static_cast<std::uint64_t>(parse_integer(value));
        else if (key == "prior_m0")
            cfg.prior_m0 = parse_vector(value);
        else if (key == "prior_sigma0")
            cfg.prior_sigma0 = parse_square_matrix(value);
        else if (key == "prices")
            cfg.prices = parse_vector(value);
        else if (key == "arrival_mean")
            cfg.arrival_mean = parse_number(value);
        else if (key == "market_mean" || key == "market_cov")
            inline_market = true;
        else if (key == "market_file")
            cfg.market = read_market_prior(resolve(value));
        else if (key == "calibration_file")
            cfg.market = calibrate(read_counts_file(resolve(value)), logistic_spec<double>());
        else if (key == "trace")
            cfg.write_trace = parse_flag(value);
        else if (key == "beta")
            cfg.params.beta = parse_number(value);
        else if (key == "arc.rho")
            cfg.params.arc.rho = parse_number(value);
        else if (key == "arc.fp_tol")
            cfg.params.arc.fp_tol = parse_number(value);
        else if (key == "arc.fp_max")
            cfg.params.arc.fp_max = static_cast<int>(parse_integer(value));
        else if (key == "arc.damping")
            cfg.params.arc.damping = parse_number(value);
        else if (key == "egreedy.eps")
            cfg.params.egreedy_eps = parse_number(value);
        else if (key == "etc.eps")
            cfg.params.etc_eps = parse_number(value);
        else if (key == "bayes_ucb.c")
            cfg.params.bayes_ucb_c = parse_number(value);
        else if (key == "kg.n_mc")
            cfg.params.kg_n_mc = static_cast<int>(parse_integer(value));
        else if (key == "ids.n_mc")
            cfg.params.ids_n_mc = static_cast<int>(parse_integer(value));
        else
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (inline_market)
        cfg.market = market_prior_from_key_values(kv);
}

KeyValues to_key_values(const ExperimentConfig& cfg)
{
    KeyValues kv;
    std::string algos;
    for (const auto& a : cfg.algos)
        algos += (algos.empty() ? "" : ",") + a;
    kv["algos"] = algos;
    kv["days"] = std::to_string(cfg.days);
    kv["replications"] = std::to_string(cfg.replications);
    kv["seed"] = std::to_string(cfg.master_seed);
    kv["prior_m0"] = format_list(cfg.prior_m0);
    kv["prior_sigma0"] = format_matrix(cfg.prior_sigma0);
    kv["prices"] = format_list(cfg.prices);
    kv["arrival_mean"] = format_number(cfg.arrival_mean);
    kv["market_mean"] = format_list(cfg.market.mean);
    kv["market_cov"] = format_matrix(cfg.market.cov);
    kv["trace"] = cfg.write_trace ? "true" : "false";
    kv["beta"] = format_number(cfg.discount());
    kv["arc.rho"] = format_number(cfg.params.arc.rho);
    kv["arc.fp_tol"] = format_number(cfg.params.arc.fp_tol);
    kv["arc.fp_max"] = std::to_string(cfg.params.arc.fp_max);
    kv["arc.damping"] = format_number(cfg.params.arc.damping);
    kv["egreedy.eps"] = format_number(cfg.params.egreedy_eps);
    kv["etc.eps"] = format_number(cfg.params.etc_eps);
    kv["bayes_ucb.c"] = format_number(cfg.params.bayes_ucb_c);
    kv["kg.n_mc"] = std::to_string(cfg.params.kg_n_mc);
    kv["ids.n_mc"] = std::to_string(cfg.params.ids_n_mc);
    return kv;
}

int count_switches(const std::vector<DayRecord>& days)
{
    int n = 0;
    for (std::size_t t = 1; t < days.size(); ++t)
        if (days[t].arm != days[t - 1].arm)
            ++n;
    return n;
}

RegretTrace run_replication(const ExperimentConfig& cfg, const std::string& algo, int replication)
{
    const AlgoKind kind = parse_algo(algo);
    const auto rep = static_cast<std::uint64_t>(replication);
    const auto spec = logistic_spec<double>();
    const auto arms = pricing_arms<double>(cfg.prices, cfg.arrival_mean);

    // Environment streams are shared by every policy for this replication.
    Rng theta_rng = make_stream(cfg.master_seed, rep, StreamTag::theta);
    Rng arrival_rng = make_stream(cfg.master_seed, rep, StreamTag::arrivals);
    Rng purchase_rng = make_stream(cfg.master_seed, rep, StreamTag::purchases);
    Rng policy_rng = make_stream(cfg.master_seed, rep, StreamTag::policy);

    const VectorXd theta = sample_theta(cfg.market, theta_rng);
    std::vector<std::int64_t> arrivals(static_cast<std::size_t>(cfg.days));
    std::poisson_distribution<std::int64_t> arrival_law(cfg.arrival_mean);
    for (auto& n : arrivals)
        n = arrival_law(arrival_rng);

    const ArcConfig<double> arc_cfg = cfg.arc_config();
    Belief belief{cfg.prior_m0, cfg.prior_sigma0};
    IndependentArmStats stats(arms.size());

    RegretTrace trace;
    trace.replication = replication;
    trace.algo = algo;
    trace.per_day.reserve(arrivals.size());
    std::vector<Index> actions;
    actions.reserve(arrivals.size());

    for (int t = 1; t <= cfg.days; ++t) {
        try {
            const double zeta = uniform01(policy_rng);
            Decision d;
            switch (kind) {
            case AlgoKind::arc: {
                ArcSolution<double> sol;
                d = arc_select(belief, arms, spec, arc_cfg, zeta, &sol);
                if (!sol.converged)
                    ++trace.solver_failures;
                break;
            }
            case AlgoKind::greedy:
                d = epsilon_greedy(belief, arms, spec, 0.0, zeta);
                break;
            case AlgoKind::egreedy:
                d = epsilon_greedy(belief, arms, spec, cfg.params.egreedy_eps, zeta);
                break;
            case AlgoKind::etc:
                d = explore_then_commit(belief, arms, spec, t, cfg.days, cfg.params.etc_eps, zeta);
                break;
            case AlgoKind::ts:
                d = thompson(belief, arms, spec, policy_rng);
                break;
            case AlgoKind::bayes_ucb:
                d = bayes_ucb(belief, arms, spec, t, cfg.days, cfg.params.bayes_ucb_c);
                break;
            case AlgoKind::kg:
                d = knowledge_gradient(belief, arms, spec, cfg.discount(), policy_rng, cfg.params.kg_n_mc);
                break;
            case AlgoKind::ids:
                d = ids(belief, arms, spec, policy_rng, cfg.params.ids_n_mc, zeta);
                break;
            case AlgoKind::ucb:
                d = ucb1(stats, arms, t);
                break;
            case AlgoKind::ucb_tuned:
                d = ucb_tuned(stats, arms, t);
                break;
            }

            const std::int64_t n = arrivals[static_cast<std::size_t>(t - 1)];
            const DayOutcome day = simulate_purchases(theta, d.arm, arms, spec, n, purchase_rng);
            if (n > 0) {
                if (uses_belief(kind))
                    belief = update_woodbury(belief, BatchObservation{n, day.purchases, d.arm}, arms, spec);
                else
                    stats.record(d.arm, day.revenue / static_cast<double>(n));
            }
            actions.push_back(d.arm);
            trace.per_day.push_back(DayRecord{t, d.arm, day.revenue, 0.0});
        } catch (const std::exception& e) {
            throw std::runtime_error(algo + " replication " + std::to_string(replication) + " day " + std::to_string(t)
                                     + ": " + e.what());
        }
    }

    const auto cum = pseudo_regret(theta, actions, arms, spec, cfg.arrival_mean);
    for (std::size_t i = 0; i < cum.size(); ++i)
        trace.per_day[i].cum_regret = cum[i];
    trace.switches = count_switches(trace.per_day);
    return trace;
}

std::vector<RegretTrace> run_grid(const ExperimentConfig& cfg, int threads)
{
    cfg.validate();
    std::vector<std::string> algos = cfg.algos;
    std::sort(algos.begin(), algos.end());
    algos.erase(std::unique(algos.begin(), algos.end()), algos.end());

    const std::size_t reps = static_cast<std::size_t>(cfg.replications);
    const std::size_t total = algos.size() * reps;
    std::vector<RegretTrace> results(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            try {
                results[i] = run_replication(cfg, algos[i / reps], static_cast<int>(i % reps));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = total;
            }
        }
    };

    const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(total)));
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

double lower_quantile(const std::vector<double>& sorted, double q)
{
    if (sorted.empty())
        throw std::invalid_argument("quantile of an empty sample");
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(sorted.size() - 1)));
    return sorted[std::min(idx, sorted.size() - 1)];
}

namespace {

void push_stats(SeriesStats& s, std::vector<double>& values)
{
    double sum = 0.0;
    for (const double v : values)
        sum += v;
    std::sort(values.begin(), values.end());
    s.mean.push_back(sum / static_cast<double>(values.size()));
    s.median.push_back(lower_quantile(values, 0.5));
    s.q75.push_back(lower_quantile(values, 0.75));
    s.q90.push_back(lower_quantile(values, 0.90));
}

} // namespace

Summary aggregate(const std::vector<RegretTrace>& traces)
{
    if (traces.empty())
        throw std::invalid_argument("aggregate: no traces");
    const std::size_t horizon = traces.front().per_day.size();

    std::map<std::string, std::vector<const RegretTrace*>> by_algo;
    for (const auto& tr : traces) {
        if (tr.per_day.size() != horizon)
            throw std::invalid_argument("aggregate: traces have mixed horizons");
        by_algo[tr.algo].push_back(&tr);
    }

    Summary summary;
    for (auto& [algo, group] : by_algo) {
        // fixed summation order regardless of how traces arrived
        std::sort(group.begin(), group.end(),
                  [](const RegretTrace* a, const RegretTrace* b) { return a->replication < b->replication; });
        AlgoSummary& out = summary[algo];
        out.replications = static_cast<int>(group.size());

        std::vector<int> running(group.size(), 0);
        std::vector<double> regret(group.size());
        std::vector<double> switches(group.size());
        for (std::size_t t = 0; t < horizon; ++t) {
            for (std::size_t i = 0; i < group.size(); ++i) {
                const auto& days = group[i]->per_day;
                if (t > 0 && days[t].arm != days[t - 1].arm)
                    ++running[i];
                regret[i] = days[t].cum_regret;
                switches[i] = static_cast<double>(running[i]);
            }
            push_stats(out.regret, regret);
            push_stats(out.switches, switches);
        }
    }
    return summary;
}

} // namespace arcbandit
