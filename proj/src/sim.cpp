#include "searchtrack/sim.hpp"

#include "searchtrack/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <thread>

namespace searchtrack::sim {

namespace {

constexpr int kSpawnAttempts = 10000;
constexpr double kMergeWarnDistance = 2.0;

std::vector<Position> positions(const TruthSet& truth) {
    std::vector<Position> out;
    for (const auto& t : truth) out.push_back(position_of(t.state));
    return out;
}

std::vector<Position> union_estimates(const StepRecord& row) {
    std::vector<Position> out;
    for (const auto& a : row.agents)
        for (const auto& x : a.estimates) out.push_back(position_of(x));
    return out;
}

bool close_cross_agent_estimates(const StepRecord& row) {
    for (std::size_t a = 0; a < row.agents.size(); ++a)
        for (std::size_t b = a + 1; b < row.agents.size(); ++b)
            for (const auto& x : row.agents[a].estimates)
                for (const auto& y : row.agents[b].estimates)
                    if (distance(position_of(x), position_of(y)) < kMergeWarnDistance) return true;
    return false;
}

SeriesStats summarize(const std::vector<std::vector<double>>& per_trial, int horizon) {
    SeriesStats s;
    s.mean.assign(static_cast<std::size_t>(horizon), 0.0);
    s.std.assign(static_cast<std::size_t>(horizon), 0.0);
    const double n = static_cast<double>(per_trial.size());
    for (std::size_t k = 0; k < s.mean.size(); ++k) {
        double sum = 0.0;
        for (const auto& t : per_trial) sum += t[k];
        const double mean = sum / n;
        double sq = 0.0;
        for (const auto& t : per_trial) sq += (t[k] - mean) * (t[k] - mean);
        s.mean[k] = mean;
        s.std[k] = per_trial.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
    }
    return s;
}

}  // namespace

void Scenario::validate() const {
    if (horizon < 1) throw ValidationError("horizon", "must be at least 1");
    if (!(area.xmax > area.xmin && area.ymax > area.ymin) || !std::isfinite(area.area()))
        throw ValidationError("area", "must have positive finite extent");
    if (!(truth_noise_scale >= 0.0)) throw ValidationError("truth.process_noise_scale", "must be non-negative");
    sensing.validate();
    control.validate();
    plan.validate();
    filter.validate();
    ospa.validate();
    if (!(coverage_threshold >= 0.0 && coverage_threshold <= 1.0))
        throw ValidationError("metrics.coverage_threshold", "must lie in [0, 1]");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        const std::string field = "targets[" + std::to_string(i) + "]";
        if (!(1 <= t.birth_step && t.birth_step <= t.death_step && t.death_step <= horizon))
            throw ValidationError(field, "requires 1 <= birth <= death <= horizon");
        const auto v = t.state.vec();
        if (!v.allFinite()) throw ValidationError(field, "state must be finite");
        if (!area.contains(position_of(t.state))) throw ValidationError(field, "birth position outside the area");
    }
    if (agent_count < 1) throw ValidationError("agents.count", "must be at least 1");
    for (std::size_t i = 0; i < agent_starts.size(); ++i)
        if (!area.contains(agent_starts[i]))
            throw ValidationError("agents.starts", "start " + std::to_string(i) + " lies outside the area");
    for (std::size_t a = 0; a < agent_starts.size(); ++a)
        for (std::size_t b = a + 1; b < agent_starts.size(); ++b)
            if (!(distance(agent_starts[a], agent_starts[b]) > plan.d_min))
                throw ValidationError("agents.starts", "starts must be separated by more than plan.d_min");
    if (spawn_box) {
        const Rect& s = *spawn_box;
        if (!(s.xmax >= s.xmin && s.ymax >= s.ymin)) throw ValidationError("agents.spawn", "empty spawn box");
        if (!area.contains({s.xmin, s.ymin}) || !area.contains({s.xmax, s.ymax}))
            throw ValidationError("agents.spawn", "spawn box must lie inside the area");
    }
    if (experiment.trials < 1) throw ValidationError("experiment.trials", "must be at least 1");
    for (int n : experiment.agent_counts)
        if (n < 1) throw ValidationError("experiment.agent_counts", "entries must be at least 1");
}

std::vector<TruthSet> ground_truth(const Scenario& scenario, Rng& rng) {
    const MotionParams truth_motion = scenario.motion.with_noise_scale(scenario.truth_noise_scale);
    std::vector<TruthSet> out(static_cast<std::size_t>(scenario.horizon));
    for (std::size_t i = 0; i < scenario.targets.size(); ++i) {
        const auto& t = scenario.targets[i];
        TargetState x = t.state;
        for (int k = t.birth_step; k <= t.death_step; ++k) {
            if (k > t.birth_step) x = truth_motion.step(x, rng);
            out[static_cast<std::size_t>(k - 1)].push_back({static_cast<int>(i + 1), x});
        }
    }
    return out;
}

std::vector<Measurement> generate_measurements(const TruthSet& truth, const AgentState& s, const SensingParams& sp,
                                               const Rect& area, Rng& rng) {
    std::vector<Measurement> z;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& t : truth) {
        const double pd = detection_prob(t.state, s, sp);
        if (!(unit(rng) < pd)) continue;
        if (distance(position_of(t.state), s) == 0.0) {
            // Bearing is undefined here; the sensor reports 0 plus noise.
            std::normal_distribution<double> n01(0.0, 1.0);
            const double e_bearing = n01(rng);
            const double e_range = n01(rng);
            z.push_back({wrap_angle(sp.bearing_std(0.0) * e_bearing), std::max(0.0, sp.range_std(0.0) * e_range)});
            continue;
        }
        z.push_back(measure(t.state, s, sp, rng));
    }
    if (sp.clutter_rate > 0.0) {
        const int clutter = std::poisson_distribution<int>(sp.clutter_rate)(rng);
        std::uniform_real_distribution<double> bearing(-std::numbers::pi, std::numbers::pi);
        std::uniform_real_distribution<double> range(0.0, area.diagonal());
        for (int c = 0; c < clutter; ++c) {
            const double b = wrap_angle(bearing(rng));
            z.push_back({b, range(rng)});
        }
    }
    std::shuffle(z.begin(), z.end(), rng);
    return z;
}

std::vector<AgentState> initial_agents(const Scenario& scenario, std::uint64_t trial, int count) {
    std::vector<AgentState> agents;
    for (int j = 0; j < count && j < static_cast<int>(scenario.agent_starts.size()); ++j)
        agents.push_back(scenario.agent_starts[static_cast<std::size_t>(j)]);
    if (static_cast<int>(agents.size()) == count) return agents;

    const Rect box = scenario.spawn_box.value_or(scenario.area);
    Rng rng = make_stream(scenario.seed, trial, 0, StreamPurpose::spawn);
    std::uniform_real_distribution<double> ux(box.xmin, box.xmax);
    std::uniform_real_distribution<double> uy(box.ymin, box.ymax);
    while (static_cast<int>(agents.size()) < count) {
        bool placed = false;
        for (int attempt = 0; attempt < kSpawnAttempts && !placed; ++attempt) {
            const Position p{ux(rng), uy(rng)};
            const bool ok = std::all_of(agents.begin(), agents.end(),
                                        [&](const Position& q) { return distance(p, q) > scenario.plan.d_min; });
            if (ok) {
                agents.push_back(p);
                placed = true;
            }
        }
        if (!placed) throw ValidationError("agents.spawn", "cannot place separated agents inside the spawn box");
    }
    return agents;
}

EpisodeLog run_episode(const Scenario& scenario, std::uint64_t trial, std::optional<int> agent_count) {
    scenario.validate();
    const int n = agent_count.value_or(scenario.agent_count);
    if (n < 1) throw ValidationError("agents.count", "must be at least 1");

    std::vector<AgentState> agents = initial_agents(scenario, trial, n);
    const auto nn = static_cast<std::size_t>(n);

    Rng truth_rng = make_stream(scenario.seed, trial, 0, StreamPurpose::truth);
    Rng planner_rng = make_stream(scenario.seed, trial, 0, StreamPurpose::planner);
    std::vector<Rng> filter_rng, meas_rng;
    for (std::size_t j = 0; j < nn; ++j) {
        filter_rng.push_back(make_stream(scenario.seed, trial, j, StreamPurpose::filter));
        meas_rng.push_back(make_stream(scenario.seed, trial, j, StreamPurpose::measurement));
    }

    const auto truth = ground_truth(scenario, truth_rng);
    const control::SearchGrid grid(scenario.area, scenario.plan.grid_step);
    std::vector<filter::MultiBernoulliDensity> posterior(nn), predictive(nn);

    EpisodeLog log;
    log.seed = scenario.seed;
    log.trial = trial;
    log.steps.reserve(static_cast<std::size_t>(scenario.horizon));

    for (int k = 1; k <= scenario.horizon; ++k) {
        StepRecord row;
        row.step = k;
        row.truth = truth[static_cast<std::size_t>(k - 1)];

        for (std::size_t j = 0; j < nn; ++j)
            predictive[j] = filter::predict(posterior[j], scenario.motion, scenario.filter.birth, scenario.area,
                                            filter_rng[j]);

        control::PlanningProblem problem{agents, predictive, scenario.sensing, scenario.control, scenario.area,
                                         scenario.plan};
        control::PlanResult decision;
        try {
            control::PlanContext ctx(problem);
            decision = control::plan(ctx);
            if (scenario.plan.backend == control::PlannerBackend::genetic)
                decision = control::plan_ga(ctx, decision, planner_rng);
        } catch (const Error& e) {
            decision = control::PlanResult{};
            decision.modes = control::select_modes(problem);
            for (const auto& s : agents) decision.actions.push_back({s});
            decision.action_indices.assign(nn, 0);
            decision.separation_fallback = true;
            row.notes.push_back(std::string("planner ") + e.kind() + ": " + e.what());
        }
        row.search_cost = decision.search_cost;
        row.separation_fallback = decision.separation_fallback;

        for (std::size_t j = 0; j < nn; ++j) agents[j] = decision.actions[j].target;

        for (std::size_t j = 0; j < nn; ++j) {
            AgentRecord rec;
            rec.position = agents[j];
            rec.mode = decision.modes.modes[j];
            rec.measurements =
                generate_measurements(row.truth, agents[j], scenario.sensing, scenario.area, meas_rng[j]);
            filter::MultiBernoulliDensity updated;
            try {
                updated = filter::update(predictive[j], rec.measurements, agents[j], scenario.sensing, scenario.area);
            } catch (const Error& e) {
                updated = filter::update(predictive[j], {}, agents[j], scenario.sensing, scenario.area);
                row.notes.push_back("agent " + std::to_string(j) + " update " + e.kind() + ": " + e.what());
            }
            posterior[j] = filter::prune(updated, scenario.filter, filter_rng[j]);
            const auto stats = filter::cardinality(posterior[j]);
            rec.n_hat = stats.mean;
            rec.variance = stats.variance;
            rec.n_rounded = stats.rounded;
            rec.estimates =
                filter::extract_states(posterior[j], static_cast<std::size_t>(std::max<long>(0, stats.rounded)));
            row.agents.push_back(std::move(rec));
        }

        const auto est = union_estimates(row);
        const auto tru = positions(row.truth);
        row.ospa = metrics::ospa(est, tru, scenario.ospa);
        row.coverage = metrics::coverage(agents, scenario.sensing, grid, scenario.coverage_threshold);
        if (close_cross_agent_estimates(row)) row.notes.push_back("estimates of two agents within 2 m");
        log.steps.push_back(std::move(row));
    }
    return log;
}

std::optional<int> first_detection_time(const EpisodeLog& log) {
    std::vector<std::vector<long>> rounded;
    rounded.reserve(log.steps.size());
    for (const auto& row : log.steps) {
        std::vector<long> r;
        for (const auto& a : row.agents) r.push_back(a.n_rounded);
        rounded.push_back(std::move(r));
    }
    return metrics::first_detection_time(rounded);
}

MonteCarloResult run_monte_carlo(const Scenario& scenario, int trials, std::span<const int> agent_counts,
                                 unsigned threads) {
    scenario.validate();
    if (trials < 1) throw ValidationError("experiment.trials", "must be at least 1");
    std::vector<int> counts(agent_counts.begin(), agent_counts.end());
    if (counts.empty()) counts.push_back(scenario.agent_count);

    struct TrialSummary {
        std::vector<double> coverage, ospa, search_cost;
        std::optional<int> first_detection;
    };
    const std::size_t jobs = counts.size() * static_cast<std::size_t>(trials);
    std::vector<TrialSummary> slots(jobs);
    std::vector<std::string> errors(jobs);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
            const std::size_t c = job / static_cast<std::size_t>(trials);
            const auto trial = static_cast<std::uint64_t>(job % static_cast<std::size_t>(trials));
            try {
                const EpisodeLog log = run_episode(scenario, trial, counts[c]);
                TrialSummary& s = slots[job];
                for (const auto& row : log.steps) {
                    s.coverage.push_back(row.coverage);
                    s.ospa.push_back(row.ospa);
                    s.search_cost.push_back(row.search_cost);
                }
                s.first_detection = first_detection_time(log);
            } catch (const std::exception& e) {
                errors[job] = e.what();
            }
        }
    };
    unsigned pool = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    pool = static_cast<unsigned>(std::min<std::size_t>(pool, jobs));
    std::vector<std::thread> workers;
    for (unsigned t = 1; t < pool; ++t) workers.emplace_back(worker);
    worker();
    for (auto& t : workers) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw Error(e);

    MonteCarloResult result;
    result.trials = trials;
    result.horizon = scenario.horizon;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        AgentCountSummary summary;
        summary.agents = counts[c];
        std::vector<std::vector<double>> cov, ospa, search;
        for (int t = 0; t < trials; ++t) {
            const auto& s = slots[c * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t)];
            cov.push_back(s.coverage);
            ospa.push_back(s.ospa);
            search.push_back(s.search_cost);
            summary.first_detection.push_back(s.first_detection);
        }
        summary.coverage = summarize(cov, scenario.horizon);
        summary.ospa = summarize(ospa, scenario.horizon);
        summary.search_cost = summarize(search, scenario.horizon);
        result.configurations.push_back(std::move(summary));
    }
    return result;
}

}  // namespace searchtrack::sim
