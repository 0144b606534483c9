#include "searchtrack/errors.hpp"
#include "searchtrack/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace searchtrack;
using namespace searchtrack::metrics;

namespace {

std::vector<Position> random_set(Rng& rng, std::size_t n) {
    std::uniform_real_distribution<double> c(0.0, 120.0);
    std::vector<Position> s(n);
    for (auto& p : s) p = {c(rng), c(rng)};
    return s;
}

TEST(Ospa, IdentityAndEmptySets) {
    Rng rng(1);
    const auto x = random_set(rng, 4);
    EXPECT_NEAR(ospa(x, x), 0.0, 1e-12);
    EXPECT_EQ(ospa({}, {}), 0.0);
    EXPECT_EQ(ospa({}, x), 100.0);
    EXPECT_EQ(ospa(x, {}), 100.0);
}

TEST(Ospa, HandComputedCases) {
    const std::vector<Position> x{{0.0, 0.0}};
    const std::vector<Position> y{{3.0, 4.0}, {500.0, 0.0}};
    // One pair at distance 5, one unmatched point at the cutoff.
    EXPECT_NEAR(ospa(x, y), std::sqrt((25.0 + 10000.0) / 2.0), 1e-12);
    OspaParams p1{100.0, 1.0};
    EXPECT_NEAR(ospa(x, y, p1), (5.0 + 100.0) / 2.0, 1e-12);
}

TEST(Ospa, MetricProperties) {
    Rng rng(2);
    std::uniform_int_distribution<int> n(0, 5);
    for (int t = 0; t < 1000; ++t) {
        const auto a = random_set(rng, static_cast<std::size_t>(n(rng)));
        const auto b = random_set(rng, static_cast<std::size_t>(n(rng)));
        const auto c = random_set(rng, static_cast<std::size_t>(n(rng)));
        EXPECT_NEAR(ospa(a, b), ospa(b, a), 1e-9);
        EXPECT_LE(ospa(a, c), ospa(a, b) + ospa(b, c) + 1e-9);
    }
}

TEST(Ospa, NonIncreasingWhenCutoffShrinks) {
    Rng rng(3);
    const auto a = random_set(rng, 3), b = random_set(rng, 5);
    double prev = 0.0;
    for (double c : {10.0, 20.0, 50.0, 100.0, 200.0}) {
        const double d = ospa(a, b, {c, 2.0});
        EXPECT_GE(d, prev - 1e-12);
        prev = d;
    }
}

TEST(Ospa, ParameterValidation) {
    EXPECT_THROW((OspaParams{0.0, 2.0}.validate()), ValidationError);
    EXPECT_THROW((OspaParams{100.0, 0.5}.validate()), ValidationError);
}

TEST(Assignment, MatchesBruteForce) {
    Rng rng(4);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int t = 0; t < 200; ++t) {
        const std::size_t rows = 1 + t % 4, cols = rows + t % 3;
        std::vector<double> cost(rows * cols);
        for (double& c : cost) c = u(rng);
        const auto pick = solve_assignment(cost, rows, cols);
        double got = 0.0;
        for (std::size_t i = 0; i < rows; ++i) got += cost[i * cols + pick[i]];
        std::vector<std::size_t> perm(cols);
        std::iota(perm.begin(), perm.end(), 0);
        double best = 1e300;
        do {
            double s = 0.0;
            for (std::size_t i = 0; i < rows; ++i) s += cost[i * cols + perm[i]];
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        EXPECT_NEAR(got, best, 1e-9);
    }
}

TEST(Coverage, Examples) {
    const SensingParams sp;
    const Rect area;
    EXPECT_EQ(coverage({}, sp, area, 2.0), 0.0);

    SensingParams wide = sp;
    wide.eta = 0.0;
    const std::vector<AgentState> one{{50.0, 50.0}};
    EXPECT_EQ(coverage(one, wide, area, 2.0), 1.0);

    SensingParams mid = sp;
    mid.eta = 0.03;
    const double radius = 10.0 + 0.49 / 0.03;
    const double disc = std::numbers::pi * radius * radius / 1e4;
    EXPECT_NEAR(coverage(one, mid, area, 2.0), disc, 0.05 * disc);
}

TEST(Coverage, MonotoneInAgentSet) {
    SensingParams sp;
    sp.eta = 0.03;
    Rng rng(5);
    std::uniform_real_distribution<double> c(0.0, 100.0);
    std::vector<AgentState> agents;
    double prev = 0.0;
    for (int i = 0; i < 6; ++i) {
        agents.push_back({c(rng), c(rng)});
        const double cov = coverage(agents, sp, Rect{}, 2.0);
        EXPECT_GE(cov, prev);
        prev = cov;
    }
}

TEST(FirstDetection, Examples) {
    const std::vector<std::vector<long>> none{{0, 0}, {0, 0}};
    EXPECT_FALSE(first_detection_time(none).has_value());
    const std::vector<std::vector<long>> third{{0}, {0}, {1}, {0}};
    EXPECT_EQ(first_detection_time(third), 3);
    const std::vector<std::vector<long>> ties{{0, 0}, {1, 2}};
    EXPECT_EQ(first_detection_time(ties), 2);
}

}  // namespace
