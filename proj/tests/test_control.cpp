#include "searchtrack/control.hpp"
#include "searchtrack/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace searchtrack;
using namespace searchtrack::control;
using filter::BernoulliComponent;
using filter::MultiBernoulliDensity;

namespace {

BernoulliComponent cloud(double r, double x, double y, double spread, Rng& rng, int n = 50) {
    std::uniform_real_distribution<double> u(-spread, spread);
    BernoulliComponent c;
    c.existence = r;
    for (int j = 0; j < n; ++j) c.particles.push_back({x + u(rng), 0.0, y + u(rng), 0.0});
    c.weights.assign(c.particles.size(), 1.0 / n);
    return c;
}

PlanningProblem problem(const std::vector<AgentState>& agents, const std::vector<MultiBernoulliDensity>& dens) {
    PlanningProblem p;
    p.agents = agents;
    p.predictive = dens;
    return p;
}

TEST(Pims, Examples) {
    EXPECT_TRUE(pims({}, {{50.0, 50.0}}).empty());
    const std::vector<TargetState> east{{60.0, 0.0, 50.0, 0.0}};
    const auto z = pims(east, {{50.0, 50.0}});
    ASSERT_EQ(z.size(), 1u);
    EXPECT_NEAR(z[0].bearing, std::numbers::pi, 1e-15);
    EXPECT_DOUBLE_EQ(z[0].range, 10.0);
    const std::vector<TargetState> three{{1.0, 0.0, 2.0, 0.0}, {3.0, 0.0, 4.0, 0.0}, {5.0, 0.0, 6.0, 0.0}};
    EXPECT_EQ(pims(three, {{0.0, 0.0}}).size(), 3u);
    EXPECT_THROW((void)pims(three, {{1.0, 2.0}}), CoincidentPositions);
}

TEST(TrackingCost, NoConfidentComponentsCostsOne) {
    Rng rng(1);
    MultiBernoulliDensity d;
    d.components.push_back(cloud(0.4, 50.0, 55.0, 1.0, rng));
    d.components.push_back(cloud(0.3, 45.0, 50.0, 1.0, rng));
    EXPECT_EQ(tracking_cost(d, {{50.0, 50.0}}, SensingParams{}, Rect{}), 1.0);
    EXPECT_EQ(tracking_cost({}, {{50.0, 50.0}}, SensingParams{}, Rect{}), 1.0);
}

TEST(TrackingCost, CertainExistenceCostsZero) {
    Rng rng(2);
    MultiBernoulliDensity d;
    d.components.push_back(cloud(1.0, 55.0, 50.0, 0.5, rng));
    EXPECT_NEAR(tracking_cost(d, {{50.0, 50.0}}, SensingParams{}, Rect{}), 0.0, 1e-12);
}

TEST(TrackingCost, MaximalVarianceCostsOne) {
    // Two r = 0.5 components out of sensing range: the pseudo-update leaves them alone.
    SensingParams sp;
    sp.eta = 1.0;
    Rng rng(3);
    MultiBernoulliDensity d;
    d.components.push_back(cloud(0.5, 90.0, 90.0, 1.0, rng));
    d.components.push_back(cloud(0.5, 80.0, 90.0, 1.0, rng));
    EXPECT_DOUBLE_EQ(tracking_cost(d, {{10.0, 10.0}}, sp, Rect{}), 1.0);
}

TEST(TrackingCost, StaysInUnitInterval) {
    Rng rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0), c(10.0, 90.0);
    for (int t = 0; t < 30; ++t) {
        MultiBernoulliDensity d;
        for (int i = 0; i < 4; ++i) d.components.push_back(cloud(u(rng), c(rng), c(rng), 2.0, rng));
        const double cost = tracking_cost(d, {{c(rng), c(rng)}}, SensingParams{}, Rect{});
        EXPECT_GE(cost, 0.0);
        EXPECT_LE(cost, 1.0);
    }
}

TEST(SearchValue, Examples) {
    const SensingParams sp;
    const std::vector<AgentState> one{{20.0, 20.0}};
    EXPECT_NEAR(search_value_at({20.0, 20.0}, one, sp), 0.01, 1e-15);
    SensingParams short_range = sp;
    short_range.eta = 1.0;
    EXPECT_EQ(search_value_at({90.0, 90.0}, one, short_range), 1.0);
    const std::vector<AgentState> two{{20.0, 20.0}, {20.0, 20.0}};
    EXPECT_NEAR(search_value_at({25.0, 20.0}, two, sp), 1e-4, 1e-15);
    EXPECT_EQ(search_value_at({1.0, 1.0}, {}, sp), 1.0);
}

TEST(SearchCost, Examples) {
    const SensingParams sp;
    const Rect area;
    EXPECT_EQ(search_cost({}, sp, area, 2.0), 1.0);

    SensingParams point = sp;
    point.eta = 1e12;
    const std::vector<AgentState> one{{50.0, 50.0}};
    EXPECT_NEAR(search_cost(one, point, area, 2.0), 1.0 - 0.99 * std::numbers::pi * 100.0 / 1e4, 1e-3);

    const std::vector<AgentState> more{{50.0, 50.0}, {20.0, 70.0}};
    EXPECT_LE(search_cost(more, sp, area, 2.0), search_cost(one, sp, area, 2.0));
}

TEST(SearchGrid, MidpointCells) {
    const SearchGrid g(Rect{}, 2.0);
    ASSERT_EQ(g.size(), 2500u);
    EXPECT_DOUBLE_EQ(g.cells()[0].x, 1.0);
    EXPECT_DOUBLE_EQ(g.cells()[0].y, 1.0);
    EXPECT_DOUBLE_EQ(g.cells().back().x, 99.0);
}

TEST(ModeSelection, ExistenceSumExamples) {
    std::vector<MultiBernoulliDensity> dens(3);
    Rng rng(5);
    dens[1].components.push_back(cloud(0.6, 50.0, 50.0, 1.0, rng));
    dens[1].components.push_back(cloud(0.5, 50.0, 50.0, 1.0, rng));
    dens[2].components.push_back(cloud(0.99, 50.0, 50.0, 1.0, rng));
    const auto m = select_modes(dens);
    EXPECT_EQ(m.modes, (std::vector<Mode>{Mode::search, Mode::track, Mode::search}));
    EXPECT_EQ(m.search_set(), (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(m.track_set(), (std::vector<std::size_t>{1}));

    std::swap(dens[1].components[0], dens[1].components[1]);
    EXPECT_EQ(select_modes(dens), m);
}

TEST(ModeSelection, SensingRangeCountsOnlyReachableMass) {
    SensingParams sp;
    sp.eta = 0.1;  // pD vanishes beyond 19.9 m
    Rng rng(6);
    std::vector<MultiBernoulliDensity> dens(1);
    dens[0].components.push_back(cloud(0.7, 90.0, 90.0, 1.0, rng));
    dens[0].components.push_back(cloud(0.7, 85.0, 90.0, 1.0, rng));
    const std::vector<AgentState> far{{10.0, 10.0}}, near{{88.0, 88.0}};
    EXPECT_NEAR(expected_in_range(dens[0], far[0], sp), 0.0, 1e-15);
    EXPECT_NEAR(expected_in_range(dens[0], near[0], sp), 1.4, 1e-12);
    EXPECT_EQ(select_modes(dens, far, sp).modes[0], Mode::search);
    EXPECT_EQ(select_modes(dens, near, sp).modes[0], Mode::track);
    EXPECT_EQ(select_modes(dens).modes[0], Mode::track);
}

TEST(Planner, SingleSearcherNeverWorseThanStaying) {
    const std::vector<AgentState> agents{{5.0, 5.0}};
    const std::vector<MultiBernoulliDensity> dens(1);
    const auto p = problem(agents, dens);
    const auto result = plan(p);
    EXPECT_EQ(result.modes.modes[0], Mode::search);
    EXPECT_LE(result.search_cost, search_cost(agents, p.sensing, p.area, p.config.grid_step) + 1e-12);
    EXPECT_LT(result.search_cost, search_cost(agents, p.sensing, p.area, p.config.grid_step));
}

TEST(Planner, ExhaustiveMatchesBruteForceAndBeatsGreedy) {
    Rng rng(7);
    std::uniform_real_distribution<double> c(10.0, 90.0), off(6.0, 12.0);
    for (int t = 0; t < 5; ++t) {
        const double x = c(rng), y = c(rng);
        const std::vector<AgentState> agents{{x, y}, {std::min(99.0, x + off(rng)), y}};
        const std::vector<MultiBernoulliDensity> dens(2);
        auto p = problem(agents, dens);
        PlanContext ctx(p);
        double best = std::numeric_limits<double>::infinity();
        std::size_t evaluated = 0;
        for (std::size_t a = 0; a < ctx.candidates(0).size(); ++a)
            for (std::size_t b = 0; b < ctx.candidates(1).size(); ++b) {
                const std::vector<Position> pos{ctx.candidates(0)[a].target, ctx.candidates(1)[b].target};
                if (!ctx.separated(pos)) continue;
                const std::vector<std::pair<std::size_t, std::size_t>> choice{{0, a}, {1, b}};
                best = std::min(best, ctx.search_cost(choice));
                ++evaluated;
            }
        EXPECT_GT(evaluated, 100u);

        const auto exhaustive = plan(ctx);
        EXPECT_EQ(exhaustive.search_cost, best);

        p.config.backend = PlannerBackend::greedy;
        const auto greedy = plan(p);
        const double stay = search_cost(agents, p.sensing, p.area, p.config.grid_step);
        EXPECT_GE(greedy.search_cost, exhaustive.search_cost);
        EXPECT_LE(greedy.search_cost, stay + 1e-12);
        EXPECT_LE(exhaustive.search_cost, stay + 1e-12);
        EXPECT_NEAR(exhaustive.search_cost,
                    search_cost(std::vector<AgentState>{exhaustive.actions[0].target, exhaustive.actions[1].target},
                                p.sensing, p.area, p.config.grid_step),
                    1e-12);
    }
}

TEST(Planner, SeparationContract) {
    Rng rng(8);
    std::uniform_real_distribution<double> c(5.0, 95.0);
    for (int t = 0; t < 20; ++t) {
        std::vector<AgentState> agents;
        while (agents.size() < 4) {
            const Position q{c(rng), c(rng)};
            if (std::all_of(agents.begin(), agents.end(), [&](const auto& a) { return distance(a, q) > 5.5; }))
                agents.push_back(q);
        }
        std::vector<MultiBernoulliDensity> dens(4);
        dens[t % 4].components.push_back(cloud(0.9, agents[t % 4].x + 4.0, agents[t % 4].y, 1.0, rng));
        const auto result = plan(problem(agents, dens));
        ASSERT_FALSE(result.separation_fallback);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j)
                EXPECT_GT(distance(result.actions[i].target, result.actions[j].target), 5.0);
    }
}

TEST(Planner, CrowdedStartIsInfeasible) {
    const std::vector<AgentState> agents{{50.0, 50.0}, {52.0, 50.0}};
    const std::vector<MultiBernoulliDensity> dens(2);
    EXPECT_THROW((void)plan(problem(agents, dens)), InfeasibleSeparation);
}

TEST(Planner, TrackerApproachesConfidentTarget) {
    Rng rng(9);
    const std::vector<AgentState> agents{{50.0, 50.0}};
    std::vector<MultiBernoulliDensity> dens(1);
    dens[0].components.push_back(cloud(0.9, 58.0, 50.0, 1.0, rng));
    dens[0].components.push_back(cloud(0.6, 42.0, 50.0, 1.0, rng));
    const auto result = plan(problem(agents, dens));
    EXPECT_EQ(result.modes.modes[0], Mode::track);
    ASSERT_EQ(result.track_costs.count(0), 1u);
    EXPECT_LE(result.track_costs.at(0), 1.0);
}

TEST(Genetic, SearchOnlyWeightDominatesGreedy) {
    Rng rng(10);
    const std::vector<AgentState> agents{{30.0, 30.0}, {38.0, 30.0}, {60.0, 70.0}};
    const std::vector<MultiBernoulliDensity> dens(3);
    auto p = problem(agents, dens);
    p.config.backend = PlannerBackend::greedy;
    p.config.w = 1.0;
    PlanContext ctx(p);
    const auto greedy = plan(ctx);
    const auto ga = plan_ga(ctx, greedy, rng);
    EXPECT_LE(objective(ctx, ga.modes, ga.action_indices), greedy.search_cost);
}

TEST(Genetic, SingleAgentEqualsEnumeration) {
    Rng rng(11);
    const std::vector<AgentState> agents{{50.0, 50.0}};
    std::vector<MultiBernoulliDensity> dens(1);
    dens[0].components.push_back(cloud(0.8, 54.0, 52.0, 1.0, rng));
    auto p = problem(agents, dens);
    p.config.w = 0.5;
    PlanContext ctx(p);
    ASSERT_EQ(ctx.candidates(0).size(), 17u);
    double best = std::numeric_limits<double>::infinity();
    for (Mode m : {Mode::search, Mode::track})
        for (std::size_t a = 0; a < 17; ++a) {
            const std::vector<std::size_t> idx{a};
            best = std::min(best, objective(ctx, ModeAssignment{{m}}, idx));
        }
    const auto ga = plan_ga(p, rng);
    EXPECT_EQ(objective(ctx, ga.modes, ga.action_indices), best);
}

TEST(Genetic, ZeroIterationsKeepsBestSeed) {
    Rng rng(12);
    const std::vector<AgentState> agents{{20.0, 20.0}, {60.0, 60.0}};
    std::vector<MultiBernoulliDensity> dens(2);
    dens[1].components.push_back(cloud(0.95, 63.0, 60.0, 1.0, rng));
    auto p = problem(agents, dens);
    p.config.ga_max_iters = 0;
    PlanContext ctx(p);
    const auto seed = plan(ctx);
    const auto ga = plan_ga(ctx, seed, rng);
    EXPECT_LE(objective(ctx, ga.modes, ga.action_indices), objective(ctx, seed.modes, seed.action_indices));
}

TEST(Objective, NoTrackersMeansNoTrackingTerm) {
    const std::vector<AgentState> agents{{50.0, 50.0}};
    const std::vector<MultiBernoulliDensity> dens(1);
    auto p = problem(agents, dens);
    p.config.w = 0.25;
    PlanContext ctx(p);
    const std::vector<std::size_t> stay{0};
    const std::vector<std::pair<std::size_t, std::size_t>> choice{{0, 0}};
    EXPECT_DOUBLE_EQ(objective(ctx, ModeAssignment{{Mode::search}}, stay), 0.25 * ctx.search_cost(choice));
    // A lone tracker: search term is the empty-set value 1, tracking cost 1 with no targets.
    EXPECT_DOUBLE_EQ(objective(ctx, ModeAssignment{{Mode::track}}, stay), 1.0);
}

TEST(Config, ValidationAndNames) {
    PlanConfig c;
    EXPECT_NO_THROW(c.validate());
    c.w = 1.5;
    EXPECT_THROW(c.validate(), ValidationError);
    EXPECT_EQ(parse_backend("ga"), PlannerBackend::genetic);
    EXPECT_EQ(parse_backend("greedy"), PlannerBackend::greedy);
    EXPECT_FALSE(parse_backend("annealing").has_value());
    EXPECT_EQ(parse_mode_count("all"), ModeCount::all);
}

}  // namespace
