#include "searchtrack/control.hpp"

#include "searchtrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace searchtrack::control {

const char* to_string(Mode m) { return m == Mode::search ? "search" : "track"; }

const char* to_string(PlannerBackend b) {
    switch (b) {
        case PlannerBackend::greedy: return "greedy";
        case PlannerBackend::exhaustive: return "exhaustive";
        case PlannerBackend::genetic: return "ga";
    }
    return "?";
}

std::optional<PlannerBackend> parse_backend(const std::string& s) {
    if (s == "greedy" || s == "greedy-sequential") return PlannerBackend::greedy;
    if (s == "exhaustive") return PlannerBackend::exhaustive;
    if (s == "ga" || s == "genetic") return PlannerBackend::genetic;
    return std::nullopt;
}

const char* to_string(ModeSelection m) { return m == ModeSelection::heuristic ? "heuristic" : "powerset"; }

std::optional<ModeSelection> parse_mode_selection(const std::string& s) {
    if (s == "heuristic") return ModeSelection::heuristic;
    if (s == "powerset") return ModeSelection::powerset;
    return std::nullopt;
}

const char* to_string(ModeCount m) { return m == ModeCount::all ? "all" : "sensing_range"; }

std::optional<ModeCount> parse_mode_count(const std::string& s) {
    if (s == "all") return ModeCount::all;
    if (s == "sensing_range") return ModeCount::sensing_range;
    return std::nullopt;
}

std::vector<std::size_t> ModeAssignment::search_set() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < modes.size(); ++j)
        if (modes[j] == Mode::search) out.push_back(j);
    return out;
}

std::vector<std::size_t> ModeAssignment::track_set() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < modes.size(); ++j)
        if (modes[j] == Mode::track) out.push_back(j);
    return out;
}

void PlanConfig::validate() const {
    if (!(d_min >= 0.0)) throw ValidationError("plan.d_min", "must be non-negative");
    if (!(grid_step > 0.0)) throw ValidationError("plan.grid_step", "must be positive");
    if (exhaustive_limit < 0) throw ValidationError("plan.exhaustive_limit", "must be non-negative");
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("plan.w", "must lie in [0, 1]");
    if (ga_population < 2) throw ValidationError("plan.ga_population", "must be at least 2");
    if (ga_max_iters < 0) throw ValidationError("plan.ga_max_iters", "must be non-negative");
    if (!(ga_epsilon >= 0.0)) throw ValidationError("plan.ga_epsilon", "must be non-negative");
    if (ga_stall < 1) throw ValidationError("plan.ga_stall", "must be at least 1");
}

SearchGrid::SearchGrid(const Rect& area, double step) : area_(area) {
    if (!(step > 0.0)) throw ValidationError("plan.grid_step", "must be positive");
    const auto nx = std::max<long>(1, std::lround(area.width() / step));
    const auto ny = std::max<long>(1, std::lround(area.height() / step));
    const double dx = area.width() / static_cast<double>(nx);
    const double dy = area.height() / static_cast<double>(ny);
    cells_.reserve(static_cast<std::size_t>(nx * ny));
    for (long i = 0; i < nx; ++i)
        for (long j = 0; j < ny; ++j)
            cells_.push_back({area.xmin + (static_cast<double>(i) + 0.5) * dx,
                              area.ymin + (static_cast<double>(j) + 0.5) * dy});
}

std::vector<double> SearchGrid::miss_field(const AgentState& s, const SensingParams& sp) const {
    std::vector<double> out(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) out[c] = 1.0 - detection_prob(cells_[c], s, sp);
    return out;
}

std::vector<Measurement> pims(std::span<const TargetState> predicted, const ControlAction& u) {
    std::vector<Measurement> out;
    out.reserve(predicted.size());
    // The mode of a Gaussian likelihood is its mean, so the ideal measurement is noise free.
    for (const auto& x : predicted) out.push_back(noise_free_measurement(x, u.target));
    return out;
}

std::vector<TargetState> pre_estimate(const filter::MultiBernoulliDensity& predictive) {
    std::vector<TargetState> out;
    for (const auto& c : predictive.components)
        if (c.existence > 0.5) out.push_back(c.mean());
    return out;
}

double tracking_cost(const filter::MultiBernoulliDensity& predictive, const ControlAction& u,
                     const SensingParams& sp, const Rect& area) {
    std::vector<Measurement> z;
    try {
        z = pims(pre_estimate(predictive), u);
    } catch (const CoincidentPositions&) {
        return 1.0;
    }
    const auto r = filter::update_existence(predictive, z, u.target, sp, area);
    if (r.empty()) return 1.0;
    const auto stats = filter::cardinality(r);
    if (stats.mean < 1.0) return 1.0;
    return 4.0 * stats.variance / static_cast<double>(r.size());
}

double search_value_at(const Position& p, std::span<const AgentState> agents, const SensingParams& sp) {
    double v = 1.0;
    for (const auto& s : agents) v *= 1.0 - detection_prob(p, s, sp);
    return v;
}

double search_cost(std::span<const AgentState> agents, const SensingParams& sp, const SearchGrid& grid) {
    if (agents.empty()) return 1.0;
    double total = 0.0;
    for (const auto& cell : grid.cells()) total += search_value_at(cell, agents, sp);
    return total / static_cast<double>(grid.size());
}

double search_cost(std::span<const AgentState> agents, const SensingParams& sp, const Rect& area,
                   double grid_step) {
    return search_cost(agents, sp, SearchGrid(area, grid_step));
}

ModeAssignment select_modes(std::span<const filter::MultiBernoulliDensity> densities) {
    ModeAssignment m;
    m.modes.reserve(densities.size());
    for (const auto& d : densities) {
        double expected = 0.0;
        for (const auto& c : d.components) expected += c.existence;
        m.modes.push_back(expected >= 1.0 ? Mode::track : Mode::search);
    }
    return m;
}

double expected_in_range(const filter::MultiBernoulliDensity& d, const AgentState& s, const SensingParams& sp) {
    double expected = 0.0;
    for (const auto& c : d.components) {
        double inside = 0.0;
        for (std::size_t i = 0; i < c.particles.size(); ++i)
            if (detection_prob(c.particles[i], s, sp) > 0.0) inside += c.weights[i];
        expected += c.existence * inside;
    }
    return expected;
}

ModeAssignment select_modes(std::span<const filter::MultiBernoulliDensity> densities,
                            std::span<const AgentState> agents, const SensingParams& sp) {
    ModeAssignment m;
    m.modes.reserve(densities.size());
    for (std::size_t j = 0; j < densities.size(); ++j)
        m.modes.push_back(expected_in_range(densities[j], agents[j], sp) >= 1.0 ? Mode::track : Mode::search);
    return m;
}

ModeAssignment select_modes(const PlanningProblem& problem) {
    if (problem.config.mode_count == ModeCount::all) return select_modes(problem.predictive);
    return select_modes(problem.predictive, problem.agents, problem.sensing);
}

PlanContext::PlanContext(const PlanningProblem& problem)
    : problem_(problem), grid_(problem.area, problem.config.grid_step) {
    if (problem.predictive.size() != problem.agents.size())
        throw ValidationError("predictive", "one density per agent is required");
    candidates_.reserve(problem.agents.size());
    for (const auto& s : problem.agents) {
        if (!problem.area.contains(s)) throw ValidationError("agents", "agent outside the surveillance area");
        candidates_.push_back(admissible_controls(s, problem.control, problem.area));
    }
    miss_fields_.resize(candidates_.size());
    track_costs_.resize(candidates_.size());
    for (std::size_t j = 0; j < candidates_.size(); ++j) {
        miss_fields_[j].resize(candidates_[j].size());
        track_costs_[j].resize(candidates_[j].size());
    }
}

const std::vector<double>& PlanContext::miss_field(std::size_t agent, std::size_t action) {
    auto& f = miss_fields_[agent][action];
    if (f.empty()) f = grid_.miss_field(candidates_[agent][action].target, problem_.sensing);
    return f;
}

double PlanContext::track_cost(std::size_t agent, std::size_t action) {
    auto& c = track_costs_[agent][action];
    if (!c) c = tracking_cost(problem_.predictive[agent], candidates_[agent][action], problem_.sensing, problem_.area);
    return *c;
}

double PlanContext::search_cost(std::span<const std::pair<std::size_t, std::size_t>> choices) {
    if (choices.empty()) return 1.0;
    std::vector<double> field = miss_field(choices[0].first, choices[0].second);
    for (std::size_t k = 1; k < choices.size(); ++k) {
        const auto& f = miss_field(choices[k].first, choices[k].second);
        for (std::size_t c = 0; c < field.size(); ++c) field[c] *= f[c];
    }
    double total = 0.0;
    for (double v : field) total += v;
    return total / static_cast<double>(field.size());
}

bool PlanContext::separated(std::span<const Position> positions) const {
    for (std::size_t a = 0; a < positions.size(); ++a)
        for (std::size_t b = a + 1; b < positions.size(); ++b)
            if (!(distance(positions[a], positions[b]) > problem_.config.d_min)) return false;
    return true;
}

double objective(PlanContext& ctx, const ModeAssignment& modes, std::span<const std::size_t> action_indices) {
    std::vector<std::pair<std::size_t, std::size_t>> searching;
    double track_sum = 0.0;
    std::size_t trackers = 0;
    for (std::size_t j = 0; j < modes.modes.size(); ++j) {
        if (modes.modes[j] == Mode::search) {
            searching.emplace_back(j, action_indices[j]);
        } else {
            track_sum += ctx.track_cost(j, action_indices[j]);
            ++trackers;
        }
    }
    const double w = ctx.problem().config.w;
    const double track_term = trackers == 0 ? 0.0 : track_sum / static_cast<double>(trackers);
    return w * ctx.search_cost(searching) + (1.0 - w) * track_term;
}

namespace {

/// Plans every agent for a fixed mode assignment.
PlanResult plan_for_modes(PlanContext& ctx, const ModeAssignment& modes) {
    const auto& problem = ctx.problem();
    const std::size_t n = ctx.agent_count();
    const double d_min = problem.config.d_min;
    std::vector<std::optional<std::size_t>> choice(n);

    auto position = [&](std::size_t k) -> Position {
        return choice[k] ? ctx.candidates(k)[*choice[k]].target : problem.agents[k];
    };
    // Candidate position p for agent j against decided agents' choices and
    // undecided agents' current positions.
    auto feasible = [&](std::size_t j, const Position& p) {
        for (std::size_t k = 0; k < n; ++k)
            if (k != j && !(distance(p, position(k)) > d_min)) return false;
        return true;
    };

    for (std::size_t j : modes.track_set()) {
        std::size_t best = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < ctx.candidates(j).size(); ++a) {
            if (!feasible(j, ctx.candidates(j)[a].target)) continue;
            const double c = ctx.track_cost(j, a);
            if (c < best_cost) {
                best_cost = c;
                best = a;
            }
        }
        choice[j] = best;
    }

    const auto searching = modes.search_set();
    const bool joint = problem.config.backend == PlannerBackend::exhaustive &&
                       searching.size() <= static_cast<std::size_t>(problem.config.exhaustive_limit);
    if (!searching.empty() && joint) {
        // Mixed-radix enumeration of the joint action space, first index fastest.
        std::vector<std::size_t> idx(searching.size(), 0);
        std::vector<std::size_t> best_idx(searching.size(), 0);
        double best_cost = std::numeric_limits<double>::infinity();
        std::vector<std::pair<std::size_t, std::size_t>> choices(searching.size());
        std::vector<Position> pos(searching.size());
        while (true) {
            bool ok = true;
            for (std::size_t k = 0; k < searching.size() && ok; ++k) {
                const std::size_t j = searching[k];
                pos[k] = ctx.candidates(j)[idx[k]].target;
                choices[k] = {j, idx[k]};
                // Trackers are decided; other searchers are checked pairwise below.
                for (std::size_t t : modes.track_set())
                    if (!(distance(pos[k], position(t)) > d_min)) ok = false;
            }
            if (ok && ctx.separated(pos)) {
                const double c = ctx.search_cost(choices);
                if (c < best_cost) {
                    best_cost = c;
                    best_idx = idx;
                }
            }
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == ctx.candidates(searching[k]).size()) idx[k++] = 0;
            if (k == idx.size()) break;
        }
        for (std::size_t k = 0; k < searching.size(); ++k) choice[searching[k]] = best_idx[k];
    } else if (!searching.empty()) {
        const std::size_t cells = ctx.grid().size();
        for (std::size_t k = 0; k < searching.size(); ++k) {
            const std::size_t j = searching[k];
            // Earlier searchers at their chosen actions, later ones staying.
            std::vector<double> others(cells, 1.0);
            for (std::size_t m = 0; m < searching.size(); ++m) {
                if (m == k) continue;
                const std::size_t o = searching[m];
                const auto& f = ctx.miss_field(o, choice[o] ? *choice[o] : 0);
                for (std::size_t c = 0; c < cells; ++c) others[c] *= f[c];
            }
            std::size_t best = 0;
            double best_cost = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < ctx.candidates(j).size(); ++a) {
                if (!feasible(j, ctx.candidates(j)[a].target)) continue;
                const auto& f = ctx.miss_field(j, a);
                double total = 0.0;
                for (std::size_t c = 0; c < cells; ++c) total += others[c] * f[c];
                const double cost = total / static_cast<double>(cells);
                if (cost < best_cost) {
                    best_cost = cost;
                    best = a;
                }
            }
            choice[j] = best;
        }
    }

    PlanResult result;
    result.modes = modes;
    std::vector<std::pair<std::size_t, std::size_t>> search_choices;
    for (std::size_t j = 0; j < n; ++j) {
        result.action_indices.push_back(*choice[j]);
        result.actions.push_back(ctx.candidates(j)[*choice[j]]);
        if (modes.modes[j] == Mode::search)
            search_choices.emplace_back(j, *choice[j]);
        else
            result.track_costs[j] = ctx.track_cost(j, *choice[j]);
    }
    result.search_cost = ctx.search_cost(search_choices);
    return result;
}

}  // namespace

PlanResult plan(PlanContext& ctx) {
    const auto& problem = ctx.problem();
    if (!ctx.separated(problem.agents))
        throw InfeasibleSeparation("current agent positions already violate the minimum separation");

    if (problem.config.mode_selection == ModeSelection::heuristic)
        return plan_for_modes(ctx, select_modes(problem));

    // Exact mode partition: minimize search cost plus summed tracking costs over all subsets.
    const std::size_t n = ctx.agent_count();
    if (n >= 20) throw ValidationError("plan.mode_selection", "power-set search is limited to fewer than 20 agents");
    std::optional<PlanResult> best;
    double best_total = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        ModeAssignment modes;
        for (std::size_t j = 0; j < n; ++j) modes.modes.push_back((mask >> j) & 1U ? Mode::track : Mode::search);
        PlanResult r = plan_for_modes(ctx, modes);
        double total = r.search_cost;
        for (const auto& [j, c] : r.track_costs) total += c;
        if (total < best_total) {
            best_total = total;
            best = std::move(r);
        }
    }
    return *best;
}

PlanResult plan(const PlanningProblem& problem) {
    PlanContext ctx(problem);
    return plan(ctx);
}

}  // namespace searchtrack::control
