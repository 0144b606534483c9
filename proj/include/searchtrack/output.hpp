#pragma once

#include "searchtrack/sim.hpp"

#include <filesystem>
#include <string>

namespace searchtrack::output {

/// Header and rows of the per-step table: step, then agent{j}_sx,
/// agent{j}_sy, agent{j}_mode, agent{j}_nhat, agent{j}_variance for each agent
/// (1-based), then search_cost, ospa, coverage.
std::string episode_csv(const sim::EpisodeLog& log);
/// step,agent,target_index,px,py
std::string estimates_csv(const sim::EpisodeLog& log);
/// step,target_id,px,py
std::string truth_csv(const sim::EpisodeLog& log);
/// agents,step,coverage_mean,coverage_std,ospa_mean,ospa_std,search_cost_mean,search_cost_std
std::string mc_summary_csv(const sim::MonteCarloResult& result);
/// agents,trial,first_detection (empty when nothing was detected)
std::string mc_detection_csv(const sim::MonteCarloResult& result);

/// JSON manifest with the seed, the resolved scenario text and the code version.
std::string manifest_json(const sim::Scenario& scenario, const std::string& command);

/// Writes episode.csv, estimates.csv, truth.csv, manifest.json and
/// resolved.scenario into `dir`, creating it if needed. Throws IoError.
void emit_logs(const sim::EpisodeLog& log, const sim::Scenario& scenario, const std::filesystem::path& dir);
/// Writes mc_summary.csv, mc_detection.csv, manifest.json and resolved.scenario.
void emit_logs(const sim::MonteCarloResult& result, const sim::Scenario& scenario, const std::filesystem::path& dir);

const char* version();

}  // namespace searchtrack::output
