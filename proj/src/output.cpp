#include "arcbandit/output.hpp"

#include "arcbandit/config.hpp"

#include "json.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace arcbandit {

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

nlohmann::ordered_json series_json(const SeriesStats& s)
{
    nlohmann::ordered_json j;
    j["mean"] = s.mean;
    j["median"] = s.median;
    j["q75"] = s.q75;
    j["q90"] = s.q90;
    return j;
}

} // namespace

void write_trace_csv(const std::filesystem::path& path, const std::vector<RegretTrace>& traces)
{
    auto out = open_out(path);
    out << "algo,replication,day,arm,revenue,cum_regret\n";
    for (const auto& tr : traces)
        for (const auto& d : tr.per_day)
            out << tr.algo << ',' << tr.replication << ',' << d.day << ',' << d.arm << ',' << format_number(d.revenue)
                << ',' << format_number(d.cum_regret) << '\n';
}

std::vector<RegretTrace> read_trace_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open trace file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "algo,replication,day,arm,revenue,cum_regret")
        throw std::runtime_error("trace file: unexpected header in " + path.string());

    std::vector<RegretTrace> traces;
    std::map<std::pair<std::string, int>, std::size_t> slot;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            f.push_back(cell);
        if (f.size() != 6)
            throw std::runtime_error("trace file: line " + std::to_string(line_no) + " has " + std::to_string(f.size())
                                     + " columns");
        const int rep = static_cast<int>(parse_integer(f[1]));
        const auto key = std::make_pair(f[0], rep);
        auto it = slot.find(key);
        if (it == slot.end()) {
            it = slot.emplace(key, traces.size()).first;
            traces.push_back(RegretTrace{rep, f[0], {}, 0, 0});
        }
        traces[it->second].per_day.push_back(DayRecord{static_cast<int>(parse_integer(f[2])), parse_integer(f[3]),
                                                       parse_number(f[4]), parse_number(f[5])});
    }
    for (auto& tr : traces)
        tr.switches = count_switches(tr.per_day);
    return traces;
}

void write_switches_csv(const std::filesystem::path& path, const std::vector<RegretTrace>& traces)
{
    auto out = open_out(path);
    out << "algo,replication,switches\n";
    for (const auto& tr : traces)
        out << tr.algo << ',' << tr.replication << ',' << tr.switches << '\n';
}

std::string summary_to_json(const Summary& summary)
{
    nlohmann::ordered_json j;
    j["quantile_convention"] = "lower";
    nlohmann::ordered_json algos = nlohmann::ordered_json::object();
    for (const auto& [name, s] : summary) {
        nlohmann::ordered_json a;
        a["replications"] = s.replications;
        a["days"] = s.regret.mean.size();
        a["cum_regret"] = series_json(s.regret);
        a["switches"] = series_json(s.switches);
        algos[name] = std::move(a);
    }
    j["algos"] = std::move(algos);
    return j.dump(1) + "\n";
}

void write_summary(const std::filesystem::path& path, const Summary& summary)
{
    auto out = open_out(path);
    out << summary_to_json(summary);
}

void write_meta(const std::filesystem::path& path, const ExperimentConfig& cfg, const std::vector<RegretTrace>& traces)
{
    nlohmann::ordered_json j;
    nlohmann::ordered_json config;
    for (const auto& [k, v] : to_key_values(cfg))
        config[k] = v;
    j["config"] = std::move(config);
    j["master_seed"] = cfg.master_seed;
    std::map<std::string, long long> failures;
    for (const auto& tr : traces)
        failures[tr.algo] += tr.solver_failures;
    nlohmann::ordered_json diag = nlohmann::ordered_json::object();
    for (const auto& [algo, n] : failures)
        diag[algo] = n;
    j["solver_failures"] = std::move(diag);
    auto out = open_out(path);
    out << j.dump(1) << "\n";
}

} // namespace arcbandit
