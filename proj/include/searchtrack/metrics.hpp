#pragma once

#include "searchtrack/control.hpp"
#include "searchtrack/models.hpp"

#include <optional>
#include <span>
#include <vector>

namespace searchtrack::metrics {

struct OspaParams {
    double c = 100.0;  // cutoff, meters
    double p = 2.0;    // order

    void validate() const;

    bool operator==(const OspaParams&) const = default;
};

/// Minimum-cost assignment of every row to a distinct column. `cost` is
/// row-major with `rows <= cols`. Returns the column chosen for each row.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t rows, std::size_t cols);

/// OSPA distance between two position sets. Both empty gives 0.
double ospa(std::span<const Position> x, std::span<const Position> y, const OspaParams& params = {});

/// Fraction of grid cells whose joint detection probability reaches `threshold`.
double coverage(std::span<const AgentState> agents, const SensingParams& sp, const control::SearchGrid& grid,
                double threshold = 0.5);
double coverage(std::span<const AgentState> agents, const SensingParams& sp, const Rect& area, double grid_step,
                double threshold = 0.5);

/// First 1-indexed step at which any agent's rounded cardinality estimate is
/// at least one. `rounded[k][j]` is agent j's estimate at step k + 1.
std::optional<int> first_detection_time(std::span<const std::vector<long>> rounded);

}  // namespace searchtrack::metrics
