#pragma once

#include "searchtrack/control.hpp"
#include "searchtrack/filter.hpp"
#include "searchtrack/metrics.hpp"
#include "searchtrack/models.hpp"
#include "searchtrack/random.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace searchtrack::sim {

/// A target that exists on steps [birth_step, death_step] and starts from `state`.
struct ScriptedTarget {
    int birth_step = 1;
    int death_step = 1;
    TargetState state;

    bool operator==(const ScriptedTarget&) const = default;
};

struct ExperimentParams {
    int trials = 1;
    std::vector<int> agent_counts;  // empty: use the scenario's agent count

    bool operator==(const ExperimentParams&) const = default;
};

struct Scenario {
    std::uint64_t seed = 1;
    int horizon = 100;
    Rect area;
    /// Motion model assumed by the filters.
    MotionParams motion = MotionParams::constant_velocity();
    /// Ground truth moves with Q scaled by this factor.
    double truth_noise_scale = 1.0;
    SensingParams sensing;
    ControlParams control;
    control::PlanConfig plan;
    filter::FilterParams filter;
    metrics::OspaParams ospa;
    double coverage_threshold = 0.5;
    std::vector<ScriptedTarget> targets;
    /// Fixed starting positions. Agents beyond these are spawned uniformly in
    /// `spawn_box` (the whole area when unset).
    std::vector<AgentState> agent_starts;
    std::optional<Rect> spawn_box;
    int agent_count = 1;
    ExperimentParams experiment;

    /// Throws ValidationError naming the first violated field.
    void validate() const;

    bool operator==(const Scenario&) const = default;
};

struct TruthTarget {
    int id = 0;  // 1-based script index
    TargetState state;
};

using TruthSet = std::vector<TruthTarget>;

/// True target sets for steps 1..horizon (index k - 1).
std::vector<TruthSet> ground_truth(const Scenario& scenario, Rng& rng);

/// Detections of `truth` by an agent at `s` plus Poisson clutter uniform over
/// bearing x [0, area diagonal], in random order. A target exactly at the
/// agent position is reported at bearing 0.
std::vector<Measurement> generate_measurements(const TruthSet& truth, const AgentState& s, const SensingParams& sp,
                                               const Rect& area, Rng& rng);

/// Starting positions for `count` agents in the given trial.
std::vector<AgentState> initial_agents(const Scenario& scenario, std::uint64_t trial, int count);

struct AgentRecord {
    AgentState position;  // after moving at this step
    control::Mode mode = control::Mode::search;
    double n_hat = 0.0;
    double variance = 0.0;
    long n_rounded = 0;
    std::vector<TargetState> estimates;
    std::vector<Measurement> measurements;
};

struct StepRecord {
    int step = 0;
    std::vector<AgentRecord> agents;
    TruthSet truth;
    double search_cost = 1.0;
    double ospa = 0.0;
    double coverage = 0.0;
    bool separation_fallback = false;
    std::vector<std::string> notes;
};

struct EpisodeLog {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::vector<StepRecord> steps;
};

/// Closed loop over the horizon: predict, plan, move, measure, update, prune.
/// `agent_count` defaults to the scenario's count.
EpisodeLog run_episode(const Scenario& scenario, std::uint64_t trial = 0, std::optional<int> agent_count = {});

std::optional<int> first_detection_time(const EpisodeLog& log);

/// Per-step mean and sample standard deviation across trials.
struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> std;
};

struct AgentCountSummary {
    int agents = 0;
    SeriesStats coverage;
    SeriesStats ospa;
    SeriesStats search_cost;
    std::vector<std::optional<int>> first_detection;  // per trial
};

struct MonteCarloResult {
    int trials = 0;
    int horizon = 0;
    std::vector<AgentCountSummary> configurations;
};

/// Runs trials 0..trials-1 for every agent count. Trial t of every count uses
/// the same derived streams, so results do not depend on `threads`
/// (0 picks the hardware concurrency).
MonteCarloResult run_monte_carlo(const Scenario& scenario, int trials, std::span<const int> agent_counts,
                                 unsigned threads = 0);

}  // namespace searchtrack::sim
