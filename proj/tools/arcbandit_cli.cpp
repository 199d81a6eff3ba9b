// arcbandit: run pricing-bandit experiments, calibrate market priors and
// summarise regret traces.

#include "arcbandit/config.hpp"
#include "arcbandit/harness.hpp"
#include "arcbandit/market.hpp"
#include "arcbandit/output.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using namespace arcbandit;

namespace {

struct RunOptions {
    std::optional<std::string> config;
    std::optional<std::string> algos;
    std::optional<std::string> prices;
    std::optional<int> days;
    std::optional<int> sims;
    std::optional<long long> seed;
    std::optional<double> rho;
    std::optional<double> beta;
    std::string out = "out";
    int threads = 0;
    bool no_trace = false;
    bool no_defaults = false;
};

int run_command(const RunOptions& o, const std::string& usage)
{
    if (!o.config && o.no_defaults) {
        std::cerr << "error: --no-defaults requires --config\n\n" << usage;
        return 2;
    }
    ExperimentConfig cfg = default_experiment_config();
    if (o.no_defaults)
        cfg.prices.resize(0);
    if (o.config) {
        const fs::path path(*o.config);
        apply_key_values(cfg, read_key_values(path), path.parent_path());
    }
    KeyValues overrides;
    if (o.algos)
        overrides["algos"] = *o.algos;
    if (o.prices)
        overrides["prices"] = *o.prices;
    if (o.days)
        overrides["days"] = std::to_string(*o.days);
    if (o.sims)
        overrides["replications"] = std::to_string(*o.sims);
    if (o.seed)
        overrides["seed"] = std::to_string(*o.seed);
    if (o.rho)
        overrides["arc.rho"] = format_number(*o.rho);
    if (o.beta)
        overrides["beta"] = format_number(*o.beta);
    if (o.no_trace)
        overrides["trace"] = "false";
    apply_key_values(cfg, overrides);
    cfg.validate();

    const int threads = o.threads > 0 ? o.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto traces = run_grid(cfg, threads);

    const fs::path out(o.out);
    fs::create_directories(out);
    if (cfg.write_trace)
        write_trace_csv(out / "trace.csv", traces);
    write_switches_csv(out / "switches.csv", traces);
    write_summary(out / "summary.json", aggregate(traces));
    write_meta(out / "meta.json", cfg, traces);
    std::cout << "wrote " << traces.size() << " traces to " << out.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dynamic pricing bandit experiments"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run the configured policy x replication grid");
    run_cmd->add_option("--config", run.config, "Key-value configuration file");
    run_cmd->add_option("--algos", run.algos, "Comma-separated algorithms (arc,greedy,egreedy,etc,ts,bayes_ucb,kg,ids,ucb,ucb_tuned)");
    run_cmd->add_option("--prices", run.prices, "Comma-separated price grid");
    run_cmd->add_option("--days", run.days, "Horizon in days");
    run_cmd->add_option("--sims", run.sims, "Replications per algorithm");
    run_cmd->add_option("--seed", run.seed, "Master seed");
    run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
    run_cmd->add_option("--rho", run.rho, "ARC randomisation scale");
    run_cmd->add_option("--beta", run.beta, "Discount factor for ARC and KG");
    run_cmd->add_option("--threads", run.threads, "Worker threads (0 = hardware)");
    run_cmd->add_flag("--no-trace", run.no_trace, "Skip trace.csv");
    run_cmd->add_flag("--no-defaults", run.no_defaults, "Do not fall back to the built-in configuration");

    std::string counts_path;
    std::string prior_out;
    auto* cal_cmd = app.add_subcommand("calibrate", "Fit a market prior from a price,trials,successes file");
    cal_cmd->add_option("--counts", counts_path, "Counts file")->required();
    cal_cmd->add_option("--out", prior_out, "Output market prior file")->required();

    std::string summary_in;
    std::string summary_out;
    auto* sum_cmd = app.add_subcommand("summarize", "Recompute summary.json from a run's trace.csv");
    sum_cmd->add_option("--in", summary_in, "Run output directory")->required();
    sum_cmd->add_option("--out", summary_out, "Summary file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run_cmd)
            return run_command(run, run_cmd->help());
        if (*cal_cmd) {
            const MarketPrior prior = calibrate(read_counts_file(counts_path), logistic_spec<double>());
            write_market_prior(prior_out, prior);
            std::cout << market_prior_to_text(prior);
            return 0;
        }
        if (*sum_cmd) {
            const Summary s = aggregate(read_trace_csv(fs::path(summary_in) / "trace.csv"));
            if (summary_out.empty())
                std::cout << summary_to_json(s);
            else
                write_summary(summary_out, s);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
