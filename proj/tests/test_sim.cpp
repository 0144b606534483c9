#include "searchtrack/config.hpp"
#include "searchtrack/errors.hpp"
#include "searchtrack/output.hpp"
#include "searchtrack/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace searchtrack;
using namespace searchtrack::sim;

namespace {

Scenario quiet_scenario(int horizon) {
    Scenario sc;
    sc.horizon = horizon;
    sc.truth_noise_scale = 0.0;
    sc.filter.birth.existence = 0.002;
    sc.agent_starts = {{20.0, 20.0}, {70.0, 70.0}};
    sc.agent_count = 2;
    return sc;
}

TEST(GroundTruth, DeterministicConstantVelocityTrack) {
    auto sc = quiet_scenario(10);
    sc.targets = {{1, 10, {10.0, 1.0, 20.0, 0.5}}};
    Rng rng(1);
    const auto truth = ground_truth(sc, rng);
    ASSERT_EQ(truth.size(), 10u);
    for (int k = 1; k <= 10; ++k) {
        ASSERT_EQ(truth[static_cast<std::size_t>(k - 1)].size(), 1u);
        const auto& x = truth[static_cast<std::size_t>(k - 1)][0].state;
        EXPECT_NEAR(x.px, 10.0 + (k - 1), 1e-12);
        EXPECT_NEAR(x.py, 20.0 + 0.5 * (k - 1), 1e-12);
    }
}

TEST(GroundTruth, ScriptedLifetimes) {
    const auto sc = config::parse_scenario(config::fixture_text("fig3"));
    Rng rng(2);
    const auto truth = ground_truth(sc, rng);
    const int windows[3][2] = {{18, 38}, {20, 55}, {70, 90}};
    for (int id = 1; id <= 3; ++id) {
        for (int k = 1; k <= sc.horizon; ++k) {
            const auto& set = truth[static_cast<std::size_t>(k - 1)];
            const bool present = std::any_of(set.begin(), set.end(), [&](const auto& t) { return t.id == id; });
            EXPECT_EQ(present, k >= windows[id - 1][0] && k <= windows[id - 1][1]) << "target " << id << " step " << k;
        }
    }
    // Birth and death positions as scripted.
    EXPECT_NEAR(truth[17][0].state.px, 16.0, 1e-9);
    EXPECT_NEAR(truth[37][0].state.py, 35.0, 1e-9);
}

TEST(GroundTruth, NoTargetsMeansEmptySets) {
    Rng rng(3);
    for (const auto& set : ground_truth(quiet_scenario(5), rng)) EXPECT_TRUE(set.empty());
}

TEST(Measurements, Examples) {
    SensingParams sp;
    sp.clutter_rate = 0.0;
    Rng rng(4);
    EXPECT_TRUE(generate_measurements({}, {50.0, 50.0}, sp, Rect{}, rng).empty());

    sp.pd_max = 1.0;
    const TruthSet under{{1, {50.0, 0.0, 50.0, 0.0}}};
    EXPECT_EQ(generate_measurements(under, {50.0, 50.0}, sp, Rect{}, rng).size(), 1u);
}

TEST(Measurements, ClutterCountIsPoisson) {
    const SensingParams sp;
    Rng rng(5);
    constexpr int n = 100000;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += static_cast<double>(generate_measurements({}, {50.0, 50.0}, sp, Rect{}, rng).size());
    EXPECT_NEAR(total / n, 5.0, 3.0 * std::sqrt(5.0 / n));
}

TEST(Measurements, DetectionsNeverExceedTargets) {
    SensingParams sp;
    sp.clutter_rate = 0.0;
    Rng rng(6);
    const TruthSet truth{{1, {40.0, 0.0, 50.0, 0.0}}, {2, {60.0, 0.0, 55.0, 0.0}}};
    for (int i = 0; i < 200; ++i) EXPECT_LE(generate_measurements(truth, {50.0, 50.0}, sp, Rect{}, rng).size(), 2u);
}

TEST(Agents, SpawnedInsideBoxAndSeparated) {
    auto sc = quiet_scenario(5);
    sc.agent_starts.clear();
    sc.spawn_box = Rect{40.0, 40.0, 60.0, 60.0};
    const auto a = initial_agents(sc, 3, 4);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(sc.spawn_box->contains(a[i]));
        for (std::size_t j = i + 1; j < a.size(); ++j) EXPECT_GT(distance(a[i], a[j]), sc.plan.d_min);
    }
    EXPECT_EQ(initial_agents(sc, 3, 4), a);
    EXPECT_NE(initial_agents(sc, 4, 4), a);
}

TEST(Episode, SearchOnlyRunStaysInSearchMode) {
    const auto sc = quiet_scenario(50);
    const auto log = run_episode(sc);
    ASSERT_EQ(log.steps.size(), 50u);
    for (std::size_t k = 0; k < log.steps.size(); ++k) {
        const auto& row = log.steps[k];
        EXPECT_EQ(row.step, static_cast<int>(k + 1));
        for (const auto& a : row.agents) {
            EXPECT_EQ(a.mode, control::Mode::search) << "step " << row.step;
            EXPECT_TRUE(sc.area.contains(a.position));
        }
        EXPECT_TRUE(row.separation_fallback || distance(row.agents[0].position, row.agents[1].position) > sc.plan.d_min);
        if (k > 0) {
            EXPECT_LE(row.search_cost, log.steps[k - 1].search_cost + 1e-9);
        }
    }
}

TEST(Episode, TargetUnderAgentTriggersTracking) {
    auto sc = quiet_scenario(15);
    sc.sensing.clutter_rate = 0.0;
    sc.targets = {{1, 15, {23.0, 0.0, 24.0, 0.0}}};
    const auto log = run_episode(sc);
    int first_track = 0;
    for (const auto& row : log.steps)
        if (row.agents[0].mode == control::Mode::track) {
            first_track = row.step;
            break;
        }
    EXPECT_GT(first_track, 0);
    EXPECT_LE(first_track, 8);
}

TEST(Episode, DeterministicForFixedSeed) {
    auto sc = quiet_scenario(12);
    sc.targets = {{2, 12, {30.0, 0.5, 30.0, 0.5}}};
    const auto a = run_episode(sc, 1);
    const auto b = run_episode(sc, 1);
    EXPECT_EQ(output::episode_csv(a), output::episode_csv(b));
    EXPECT_EQ(output::estimates_csv(a), output::estimates_csv(b));
    EXPECT_NE(output::episode_csv(a), output::episode_csv(run_episode(sc, 2)));
}

TEST(Episode, CrowdedStartIsRejected) {
    auto sc = quiet_scenario(3);
    sc.agent_starts = {{50.0, 50.0}, {52.0, 50.0}};
    EXPECT_THROW((void)run_episode(sc), ValidationError);
}

TEST(MonteCarlo, SingleTrialEqualsEpisode) {
    auto sc = quiet_scenario(8);
    sc.agent_starts.clear();
    const std::vector<int> counts{2};
    const auto mc = run_monte_carlo(sc, 1, counts, 1);
    const auto log = run_episode(sc, 0, 2);
    ASSERT_EQ(mc.configurations.size(), 1u);
    const auto& s = mc.configurations[0];
    for (std::size_t k = 0; k < log.steps.size(); ++k) {
        EXPECT_EQ(s.coverage.mean[k], log.steps[k].coverage);
        EXPECT_EQ(s.ospa.mean[k], log.steps[k].ospa);
        EXPECT_EQ(s.search_cost.mean[k], log.steps[k].search_cost);
        EXPECT_EQ(s.coverage.std[k], 0.0);
    }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
    auto sc = quiet_scenario(6);
    sc.agent_starts.clear();
    const std::vector<int> counts{2, 3};
    const auto one = run_monte_carlo(sc, 4, counts, 1);
    const auto many = run_monte_carlo(sc, 4, counts, 3);
    EXPECT_EQ(output::mc_summary_csv(one), output::mc_summary_csv(many));
    EXPECT_EQ(output::mc_detection_csv(one), output::mc_detection_csv(many));
}

TEST(MonteCarlo, MoreAgentsCoverMore) {
    auto sc = quiet_scenario(20);
    sc.agent_starts.clear();
    sc.sensing.eta = 0.03;
    const std::vector<int> counts{2, 4};
    const auto mc = run_monte_carlo(sc, 5, counts);
    EXPECT_GE(mc.configurations[1].coverage.mean.back(), mc.configurations[0].coverage.mean.back());
}

TEST(ScenarioValidation, RejectsBadTargets) {
    auto sc = quiet_scenario(10);
    sc.targets = {{5, 20, {10.0, 0.0, 10.0, 0.0}}};
    EXPECT_THROW(sc.validate(), ValidationError);
    sc.targets = {{1, 5, {150.0, 0.0, 10.0, 0.0}}};
    EXPECT_THROW(sc.validate(), ValidationError);
}

}  // namespace
