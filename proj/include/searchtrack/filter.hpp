#pragma once

#include "searchtrack/models.hpp"
#include "searchtrack/random.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace searchtrack::filter {

/// One hypothesized target: existence probability and a weighted particle
/// approximation of its spatial density.
struct BernoulliComponent {
    double existence = 0.0;
    std::vector<TargetState> particles;
    std::vector<double> weights;

    /// Weighted particle mean.
    [[nodiscard]] TargetState mean() const;
    /// Throws ValidationError when the component invariants do not hold.
    void validate() const;
};

struct MultiBernoulliDensity {
    std::vector<BernoulliComponent> components;

    [[nodiscard]] std::size_t size() const { return components.size(); }
    [[nodiscard]] bool empty() const { return components.empty(); }
};

/// Spontaneous births appended at every prediction: `count` components with
/// existence `existence`, positions uniform over the surveillance area and
/// zero-mean Gaussian velocities.
struct BirthModel {
    int count = 4;
    double existence = 0.02;
    double velocity_std = 1.0;
    int particles = 500;

    void validate() const;

    bool operator==(const BirthModel&) const = default;
};

/// SMC housekeeping knobs.
struct FilterParams {
    int particles = 500;       // per component after resampling
    double prune_threshold = 1e-3;
    int max_components = 100;
    BirthModel birth;

    void validate() const;

    bool operator==(const FilterParams&) const = default;
};

struct CardinalityStats {
    double mean = 0.0;      // sum of existence probabilities
    double variance = 0.0;  // sum of r (1 - r)
    long rounded = 0;
};

/// Counters for numerical corner cases met during an update.
struct UpdateDiagnostics {
    std::size_t dropped_degenerate = 0;  // measurement components with underflowing normalizer
    std::size_t clamped_existence = 0;   // measurement components whose existence exceeded 1
};

/// Clutter intensity used by the update: Poisson rate over a uniform
/// bearing x range window of (-pi, pi] x [0, diagonal(area)].
double clutter_intensity(const SensingParams& sp, const Rect& area);

/// Survival-weighted propagation of every component followed by births.
MultiBernoulliDensity predict(const MultiBernoulliDensity& posterior, const MotionParams& mp,
                              const BirthModel& birth, const Rect& area, Rng& rng);

/// Multi-Bernoulli measurement update: one legacy component per predicted
/// component followed by one measurement component per measurement.
MultiBernoulliDensity update(const MultiBernoulliDensity& predictive, std::span<const Measurement> measurements,
                             const AgentState& s, const SensingParams& sp, const Rect& area,
                             UpdateDiagnostics* diagnostics = nullptr);

/// Existence probabilities `update` would produce, in the same order, without
/// building the particle sets. Used by planning pseudo-updates.
std::vector<double> update_existence(const MultiBernoulliDensity& predictive,
                                     std::span<const Measurement> measurements, const AgentState& s,
                                     const SensingParams& sp, const Rect& area,
                                     UpdateDiagnostics* diagnostics = nullptr);

CardinalityStats cardinality(const MultiBernoulliDensity& d);
CardinalityStats cardinality(std::span<const double> existences);

/// Means of the `n` most likely components, ordered by decreasing existence
/// (ties keep component order).
std::vector<TargetState> extract_states(const MultiBernoulliDensity& d, std::size_t n);

/// Drops components below `prune_threshold`, keeps the `max_components` most
/// likely, and systematically resamples each survivor to `particles`
/// equally weighted particles.
MultiBernoulliDensity prune(const MultiBernoulliDensity& d, double prune_threshold, std::size_t max_components,
                            std::size_t particles, Rng& rng);

inline MultiBernoulliDensity prune(const MultiBernoulliDensity& d, const FilterParams& fp, Rng& rng) {
    return prune(d, fp.prune_threshold, static_cast<std::size_t>(fp.max_components),
                 static_cast<std::size_t>(fp.particles), rng);
}

/// Systematic resampling of a normalized weight vector; returns the selected indices.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n, Rng& rng);

}  // namespace searchtrack::filter
