#pragma once

#include "arcbandit/harness.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace arcbandit {

/// algo,replication,day,arm,revenue,cum_regret (arm is 0-based).
void write_trace_csv(const std::filesystem::path& path, const std::vector<RegretTrace>& traces);
std::vector<RegretTrace> read_trace_csv(const std::filesystem::path& path);

/// algo,replication,switches
void write_switches_csv(const std::filesystem::path& path, const std::vector<RegretTrace>& traces);

std::string summary_to_json(const Summary& summary);
void write_summary(const std::filesystem::path& path, const Summary& summary);

/// Full configuration plus per-algorithm solver diagnostics.
void write_meta(const std::filesystem::path& path, const ExperimentConfig& cfg, const std::vector<RegretTrace>& traces);

} // namespace arcbandit
