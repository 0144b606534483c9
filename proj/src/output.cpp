#include "searchtrack/output.hpp"

#include "searchtrack/config.hpp"
#include "searchtrack/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

#ifndef SEARCHTRACK_VERSION
#define SEARCHTRACK_VERSION "0.0.0"
#endif

namespace searchtrack::output {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void prepare(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

}  // namespace

const char* version() { return SEARCHTRACK_VERSION; }

std::string episode_csv(const sim::EpisodeLog& log) {
    std::string out = "step";
    const std::size_t agents = log.steps.empty() ? 0 : log.steps.front().agents.size();
    for (std::size_t j = 1; j <= agents; ++j) {
        const std::string a = "agent" + std::to_string(j);
        out += "," + a + "_sx," + a + "_sy," + a + "_mode," + a + "_nhat," + a + "_variance";
    }
    out += ",search_cost,ospa,coverage\n";
    for (const auto& row : log.steps) {
        out += std::to_string(row.step);
        for (const auto& a : row.agents) {
            out += "," + num(a.position.x) + "," + num(a.position.y) + "," + control::to_string(a.mode) + "," +
                   num(a.n_hat) + "," + num(a.variance);
        }
        out += "," + num(row.search_cost) + "," + num(row.ospa) + "," + num(row.coverage) + "\n";
    }
    return out;
}

std::string estimates_csv(const sim::EpisodeLog& log) {
    std::string out = "step,agent,target_index,px,py\n";
    for (const auto& row : log.steps)
        for (std::size_t j = 0; j < row.agents.size(); ++j)
            for (std::size_t i = 0; i < row.agents[j].estimates.size(); ++i) {
                const auto& x = row.agents[j].estimates[i];
                out += std::to_string(row.step) + "," + std::to_string(j + 1) + "," + std::to_string(i + 1) + "," +
                       num(x.px) + "," + num(x.py) + "\n";
            }
    return out;
}

std::string truth_csv(const sim::EpisodeLog& log) {
    std::string out = "step,target_id,px,py\n";
    for (const auto& row : log.steps)
        for (const auto& t : row.truth)
            out += std::to_string(row.step) + "," + std::to_string(t.id) + "," + num(t.state.px) + "," +
                   num(t.state.py) + "\n";
    return out;
}

std::string mc_summary_csv(const sim::MonteCarloResult& result) {
    std::string out = "agents,step,coverage_mean,coverage_std,ospa_mean,ospa_std,search_cost_mean,search_cost_std\n";
    for (const auto& c : result.configurations)
        for (std::size_t k = 0; k < c.coverage.mean.size(); ++k)
            out += std::to_string(c.agents) + "," + std::to_string(k + 1) + "," + num(c.coverage.mean[k]) + "," +
                   num(c.coverage.std[k]) + "," + num(c.ospa.mean[k]) + "," + num(c.ospa.std[k]) + "," +
                   num(c.search_cost.mean[k]) + "," + num(c.search_cost.std[k]) + "\n";
    return out;
}

std::string mc_detection_csv(const sim::MonteCarloResult& result) {
    std::string out = "agents,trial,first_detection\n";
    for (const auto& c : result.configurations)
        for (std::size_t t = 0; t < c.first_detection.size(); ++t) {
            const auto& d = c.first_detection[t];
            out += std::to_string(c.agents) + "," + std::to_string(t) + "," + (d ? std::to_string(*d) : "") + "\n";
        }
    return out;
}

std::string manifest_json(const sim::Scenario& scenario, const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["seed"] = scenario.seed;
    j["version"] = version();
    j["config"] = config::serialize(scenario);
    return j.dump(2) + "\n";
}

void emit_logs(const sim::EpisodeLog& log, const sim::Scenario& scenario, const std::filesystem::path& dir) {
    prepare(dir);
    write_file(dir / "episode.csv", episode_csv(log));
    write_file(dir / "estimates.csv", estimates_csv(log));
    write_file(dir / "truth.csv", truth_csv(log));
    write_file(dir / "manifest.json", manifest_json(scenario, "run"));
    write_file(dir / "resolved.scenario", config::serialize(scenario));
}

void emit_logs(const sim::MonteCarloResult& result, const sim::Scenario& scenario, const std::filesystem::path& dir) {
    prepare(dir);
    write_file(dir / "mc_summary.csv", mc_summary_csv(result));
    write_file(dir / "mc_detection.csv", mc_detection_csv(result));
    write_file(dir / "manifest.json", manifest_json(scenario, "mc"));
    write_file(dir / "resolved.scenario", config::serialize(scenario));
}

}  // namespace searchtrack::output
