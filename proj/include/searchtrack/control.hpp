#pragma once

#include "searchtrack/filter.hpp"
#include "searchtrack/models.hpp"
#include "searchtrack/random.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace searchtrack::control {

enum class Mode { search, track };

const char* to_string(Mode m);

/// Per-agent mode. The search set and track set partition the agents.
struct ModeAssignment {
    std::vector<Mode> modes;

    [[nodiscard]] std::vector<std::size_t> search_set() const;
    [[nodiscard]] std::vector<std::size_t> track_set() const;

    bool operator==(const ModeAssignment&) const = default;
};

enum class PlannerBackend { greedy, exhaustive, genetic };
enum class ModeSelection { heuristic, powerset };
/// Which existence mass the mode heuristic counts: every component, or each
/// component weighted by its probability of lying where pD > 0.
enum class ModeCount { all, sensing_range };

const char* to_string(PlannerBackend b);
std::optional<PlannerBackend> parse_backend(const std::string& s);
const char* to_string(ModeSelection m);
std::optional<ModeSelection> parse_mode_selection(const std::string& s);
const char* to_string(ModeCount m);
std::optional<ModeCount> parse_mode_count(const std::string& s);

struct PlanConfig {
    double d_min = 5.0;
    double grid_step = 2.0;
    PlannerBackend backend = PlannerBackend::exhaustive;
    /// Largest search set optimized jointly by the exhaustive backend.
    int exhaustive_limit = 2;
    ModeSelection mode_selection = ModeSelection::heuristic;
    ModeCount mode_count = ModeCount::sensing_range;
    double w = 0.5;
    int ga_population = 64;
    int ga_max_iters = 50;
    double ga_epsilon = 1e-9;
    /// Generations over which the best fitness must improve by more than
    /// `ga_epsilon` for the GA to continue.
    int ga_stall = 10;

    void validate() const;

    bool operator==(const PlanConfig&) const = default;
};

struct PlanResult {
    ModeAssignment modes;
    std::vector<ControlAction> actions;        // indexed by agent
    std::vector<std::size_t> action_indices;   // into each agent's admissible set
    double search_cost = 1.0;
    std::map<std::size_t, double> track_costs;
    /// Set when no separated assignment was found and every agent stays put.
    bool separation_fallback = false;
};

/// Midpoint quadrature grid over the surveillance area. The cell size is
/// adjusted so an integer number of cells tiles each side.
class SearchGrid {
public:
    SearchGrid(const Rect& area, double step);

    [[nodiscard]] std::span<const Position> cells() const { return cells_; }
    [[nodiscard]] std::size_t size() const { return cells_.size(); }
    [[nodiscard]] const Rect& area() const { return area_; }

    /// 1 - pD at every cell for an agent at `s`.
    [[nodiscard]] std::vector<double> miss_field(const AgentState& s, const SensingParams& sp) const;

private:
    Rect area_;
    std::vector<Position> cells_;
};

/// Predicted ideal measurement set: the noise-free measurement of each
/// predicted state seen from `u`. Throws CoincidentPositions.
std::vector<Measurement> pims(std::span<const TargetState> predicted, const ControlAction& u);

/// States of the predicted components with existence above 1/2.
std::vector<TargetState> pre_estimate(const filter::MultiBernoulliDensity& predictive);

/// Normalized cardinality variance after a pseudo-update with the PIMS at
/// `u`: 4 sigma / v when the expected count is at least 1, else 1.
double tracking_cost(const filter::MultiBernoulliDensity& predictive, const ControlAction& u,
                     const SensingParams& sp, const Rect& area);

/// Probability that no agent in `agents` detects a target at `p`.
double search_value_at(const Position& p, std::span<const AgentState> agents, const SensingParams& sp);

/// Mean search value over the grid; 1 when no agent searches.
double search_cost(std::span<const AgentState> agents, const SensingParams& sp, const SearchGrid& grid);
double search_cost(std::span<const AgentState> agents, const SensingParams& sp, const Rect& area,
                   double grid_step);

/// Track mode iff the expected number of targets is at least one.
ModeAssignment select_modes(std::span<const filter::MultiBernoulliDensity> densities);

/// Expected number of targets inside the sensing range (pD > 0) of `s`.
double expected_in_range(const filter::MultiBernoulliDensity& d, const AgentState& s, const SensingParams& sp);

/// Track mode iff the expected number of targets inside the agent's sensing
/// range is at least one.
ModeAssignment select_modes(std::span<const filter::MultiBernoulliDensity> densities,
                            std::span<const AgentState> agents, const SensingParams& sp);

/// Inputs shared by the planners. Spans must outlive the problem.
struct PlanningProblem {
    std::span<const AgentState> agents;
    std::span<const filter::MultiBernoulliDensity> predictive;
    SensingParams sensing;
    ControlParams control;
    Rect area;
    PlanConfig config;
};

/// Modes per the configured counting rule.
ModeAssignment select_modes(const PlanningProblem& problem);

/// Candidate actions and memoized per-(agent, action) costs for one planning step.
class PlanContext {
public:
    explicit PlanContext(const PlanningProblem& problem);

    [[nodiscard]] const PlanningProblem& problem() const { return problem_; }
    [[nodiscard]] std::size_t agent_count() const { return candidates_.size(); }
    [[nodiscard]] const std::vector<ControlAction>& candidates(std::size_t agent) const {
        return candidates_[agent];
    }
    [[nodiscard]] const SearchGrid& grid() const { return grid_; }

    [[nodiscard]] const std::vector<double>& miss_field(std::size_t agent, std::size_t action);
    [[nodiscard]] double track_cost(std::size_t agent, std::size_t action);

    /// Search cost for the given (agent, action) choices; 1 when empty.
    [[nodiscard]] double search_cost(std::span<const std::pair<std::size_t, std::size_t>> choices);

    /// True when every pair of chosen positions is farther apart than d_min.
    [[nodiscard]] bool separated(std::span<const Position> positions) const;

private:
    PlanningProblem problem_;
    SearchGrid grid_;
    std::vector<std::vector<ControlAction>> candidates_;
    std::vector<std::vector<std::vector<double>>> miss_fields_;
    std::vector<std::vector<std::optional<double>>> track_costs_;
};

/// Weighted search/track objective of a complete assignment:
/// w * search cost + (1 - w) * mean tracking cost of the tracking agents
/// (the tracking term is 0 when nobody tracks).
double objective(PlanContext& ctx, const ModeAssignment& modes, std::span<const std::size_t> action_indices);

/// Heuristic planner. Modes come from `select_modes` (or a power-set search
/// when configured). Tracking agents each minimize their tracking cost;
/// searching agents minimize the joint search cost, exhaustively up to
/// `exhaustive_limit` agents with the exhaustive backend and sequentially
/// otherwise. Throws InfeasibleSeparation if the agents already violate d_min.
PlanResult plan(const PlanningProblem& problem);
PlanResult plan(PlanContext& ctx);

/// Genetic-algorithm solver for the weighted objective. The population is
/// seeded with `seed` (usually the heuristic plan).
PlanResult plan_ga(PlanContext& ctx, const PlanResult& seed, Rng& rng);
/// Seeds the GA with `plan(problem)`.
PlanResult plan_ga(const PlanningProblem& problem, Rng& rng);

}  // namespace searchtrack::control
