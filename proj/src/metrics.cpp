#include "searchtrack/metrics.hpp"

#include "searchtrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace searchtrack::metrics {

void OspaParams::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("metrics.ospa_c", "must be positive");
    if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("metrics.ospa_p", "must be at least 1");
}

// Shortest augmenting path Hungarian method with row and column potentials.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t rows, std::size_t cols) {
    if (rows > cols) throw ValidationError("assignment", "more rows than columns");
    if (cost.size() != rows * cols) throw ValidationError("assignment", "cost matrix size mismatch");
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based internally; index 0 is the virtual source column.
    std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
    std::vector<std::size_t> match(cols + 1, 0), way(cols + 1, 0);
    for (std::size_t i = 1; i <= rows; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(cols + 1, inf);
        std::vector<bool> used(cols + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= cols; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> out(rows);
    for (std::size_t j = 1; j <= cols; ++j)
        if (match[j] != 0) out[match[j] - 1] = j - 1;
    return out;
}

double ospa(std::span<const Position> x, std::span<const Position> y, const OspaParams& params) {
    params.validate();
    if (x.size() > y.size()) std::swap(x, y);
    const std::size_t m = x.size();
    const std::size_t n = y.size();
    if (n == 0) return 0.0;
    if (m == 0) return params.c;

    std::vector<double> cost(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost[i * n + j] = std::pow(std::min(params.c, distance(x[i], y[j])), params.p);
    const auto assignment = solve_assignment(cost, m, n);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += cost[i * n + assignment[i]];
    total += std::pow(params.c, params.p) * static_cast<double>(n - m);
    return std::pow(total / static_cast<double>(n), 1.0 / params.p);
}

double coverage(std::span<const AgentState> agents, const SensingParams& sp, const control::SearchGrid& grid,
                double threshold) {
    if (grid.size() == 0) return 0.0;
    std::size_t covered = 0;
    for (const auto& cell : grid.cells())
        if (1.0 - control::search_value_at(cell, agents, sp) >= threshold) ++covered;
    return static_cast<double>(covered) / static_cast<double>(grid.size());
}

double coverage(std::span<const AgentState> agents, const SensingParams& sp, const Rect& area, double grid_step,
                double threshold) {
    return coverage(agents, sp, control::SearchGrid(area, grid_step), threshold);
}

std::optional<int> first_detection_time(std::span<const std::vector<long>> rounded) {
    for (std::size_t k = 0; k < rounded.size(); ++k)
        if (std::any_of(rounded[k].begin(), rounded[k].end(), [](long n) { return n >= 1; }))
            return static_cast<int>(k + 1);
    return std::nullopt;
}

}  // namespace searchtrack::metrics
