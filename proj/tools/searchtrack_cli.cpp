#include "searchtrack/config.hpp"
#include "searchtrack/errors.hpp"
#include "searchtrack/output.hpp"
#include "searchtrack/sim.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace searchtrack;

struct Options {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string agents;
    std::string planner;
    std::string out = "out";
    std::vector<std::string> sets;
    unsigned threads = 0;
    bool print = false;
};

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

/// --set pairs first so the dedicated flags take precedence.
std::vector<std::string> overrides(const Options& o, bool monte_carlo) {
    std::vector<std::string> out = o.sets;
    if (o.seed) out.push_back("seed=" + std::to_string(*o.seed));
    if (o.trials) out.push_back("experiment.trials=" + std::to_string(*o.trials));
    if (!o.planner.empty()) out.push_back("plan.backend=" + o.planner);
    if (!o.agents.empty()) {
        if (monte_carlo)
            out.push_back("experiment.agent_counts=[" + o.agents + "]");
        else
            out.push_back("agents.count=" + o.agents);
    }
    return out;
}

int do_run(const sim::Scenario& s, const Options& o) {
    const auto log = sim::run_episode(s);
    output::emit_logs(log, s, o.out);
    const auto first = sim::first_detection_time(log);
    std::cout << "run: " << log.steps.size() << " steps, first detection "
              << (first ? std::to_string(*first) : std::string("none")) << ", output in " << o.out << "\n";
    return 0;
}

int do_mc(const sim::Scenario& s, const Options& o) {
    const auto result = sim::run_monte_carlo(s, s.experiment.trials, s.experiment.agent_counts, o.threads);
    output::emit_logs(result, s, o.out);
    for (const auto& c : result.configurations) {
        double sum = 0.0;
        int n = 0;
        for (const auto& d : c.first_detection)
            if (d) {
                sum += *d;
                ++n;
            }
        std::cout << "mc: agents " << c.agents << ", final coverage " << c.coverage.mean.back()
                  << ", final ospa " << c.ospa.mean.back() << ", mean first detection "
                  << (n > 0 ? std::to_string(sum / n) : std::string("none")) << "\n";
    }
    std::cout << "mc: " << result.trials << " trials per configuration, output in " << o.out << "\n";
    return 0;
}

void add_common(CLI::App* cmd, Options& o, bool mc) {
    cmd->add_option("--seed", o.seed, "Root random seed");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials per configuration");
    cmd->add_option("--agents", o.agents, mc ? "Comma-separated agent counts" : "Number of agents");
    cmd->add_option("--planner", o.planner, "Planner backend")->check(CLI::IsMember({"greedy", "exhaustive", "ga"}));
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--set", o.sets, "Override a scenario key: key=value")->allow_extra_args(false);
    if (mc) cmd->add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent search-and-track simulator"};
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "Run one episode and write per-step logs");
    run->add_option("scenario", o.scenario, "Scenario file")->required();
    add_common(run, o, false);

    auto* mc = app.add_subcommand("mc", "Run Monte Carlo trials over agent counts");
    mc->add_option("scenario", o.scenario, "Scenario file")->required();
    add_common(mc, o, true);

    auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
    validate->add_option("scenario", o.scenario, "Scenario file")->required();
    validate->add_option("--set", o.sets, "Override a scenario key: key=value")->allow_extra_args(false);

    auto* fixture = app.add_subcommand("paper-scenario", "Run or print a built-in scenario (fig1, fig2, fig3)");
    fixture->add_option("name", o.scenario, "Fixture name")->required();
    fixture->add_flag("--print", o.print, "Print the fixture document instead of running it");
    add_common(fixture, o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << one_line(e.what()) << "\n";
        return 2;
    }

    try {
        if (*run) return do_run(config::load_scenario(o.scenario, overrides(o, false)), o);
        if (*mc) return do_mc(config::load_scenario(o.scenario, overrides(o, true)), o);
        if (*validate) {
            const auto s = config::load_scenario(o.scenario, o.sets);
            std::cout << "ok: " << s.horizon << " steps, " << s.agent_count << " agents, " << s.targets.size()
                      << " targets\n";
            return 0;
        }
        const std::string& text = config::fixture_text(o.scenario);
        if (o.print) {
            std::cout << text;
            return 0;
        }
        const bool batch = !config::parse_scenario(text).experiment.agent_counts.empty();
        const auto s = config::parse_scenario(text, overrides(o, batch));
        return batch ? do_mc(s, o) : do_run(s, o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << one_line(e.what()) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << one_line(e.what()) << "\n";
        return 1;
    }
}
