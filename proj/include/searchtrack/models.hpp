#pragma once

#include "searchtrack/random.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

namespace searchtrack {

/// Kinematic target state, ordered [px, vx, py, vy].
struct TargetState {
    double px = 0.0;
    double vx = 0.0;
    double py = 0.0;
    double vy = 0.0;

    [[nodiscard]] Eigen::Vector4d vec() const { return {px, vx, py, vy}; }
    static TargetState from_vec(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }

    bool operator==(const TargetState&) const = default;
};

/// Planar position. Agents are described by their position only.
struct Position {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Position&) const = default;
};

using AgentState = Position;

inline double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Position part of a target state (the H projection).
inline Position position_of(const TargetState& x) { return {x.px, x.py}; }

/// Axis-aligned surveillance rectangle. Membership is closed on every side.
struct Rect {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 100.0;
    double ymax = 100.0;

    [[nodiscard]] double width() const { return xmax - xmin; }
    [[nodiscard]] double height() const { return ymax - ymin; }
    [[nodiscard]] double area() const { return width() * height(); }
    [[nodiscard]] double diagonal() const { return std::hypot(width(), height()); }
    [[nodiscard]] bool contains(const Position& p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    [[nodiscard]] Position center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }

    bool operator==(const Rect&) const = default;
};

/// Range-bearing observation. Bearing lies in (-pi, pi].
struct Measurement {
    double bearing = 0.0;
    double range = 0.0;

    bool operator==(const Measurement&) const = default;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    return a;
}

/// Linear-Gaussian target motion with constant survival probability.
class MotionParams {
public:
    /// Near-constant-velocity model with sampling interval `T`.
    static MotionParams constant_velocity(double T = 1.0, double survival = 0.99);

    /// Throws ValidationError unless Q is symmetric PSD and survival is in [0, 1].
    MotionParams(Eigen::Matrix4d F, Eigen::Matrix4d Q, double survival, double T = 1.0);

    [[nodiscard]] const Eigen::Matrix4d& F() const { return F_; }
    [[nodiscard]] const Eigen::Matrix4d& Q() const { return Q_; }
    [[nodiscard]] double survival() const { return survival_; }
    [[nodiscard]] double T() const { return T_; }

    /// Q scaled by `factor` (factor 0 gives deterministic motion).
    [[nodiscard]] MotionParams with_noise_scale(double factor) const;
    [[nodiscard]] MotionParams with_survival(double survival) const;

    /// Draws F x + v with v ~ N(0, Q).
    [[nodiscard]] TargetState step(const TargetState& x, Rng& rng) const;
    /// Noise-free F x.
    [[nodiscard]] TargetState mean_step(const TargetState& x) const;
    /// N(x_next; F x, Q). Q is regularized by 1e-9 I when it is not positive definite.
    [[nodiscard]] double transition_density(const TargetState& x_next, const TargetState& x) const;

    bool operator==(const MotionParams& o) const {
        return F_ == o.F_ && Q_ == o.Q_ && survival_ == o.survival_ && T_ == o.T_;
    }

private:
    Eigen::Matrix4d F_;
    Eigen::Matrix4d Q_;
    double survival_;
    double T_;
    Eigen::Matrix4d sample_factor_;  // A with A A^T = Q
};

/// Detection and measurement-noise model shared by all agents.
struct SensingParams {
    double pd_max = 0.99;
    double r0 = 10.0;
    double eta = 0.003;
    double phi0 = std::numbers::pi / 180.0;
    double beta_phi = 1e-5;
    double zeta0 = 1.0;
    double beta_zeta = 3e-3;
    double clutter_rate = 5.0;

    /// Throws ValidationError naming the offending field.
    void validate() const;

    [[nodiscard]] double bearing_std(double d) const { return phi0 + beta_phi * d; }
    [[nodiscard]] double range_std(double d) const { return zeta0 + beta_zeta * d * d; }

    bool operator==(const SensingParams&) const = default;
};

struct ControlParams {
    double delta_r = 2.0;
    int n_r = 2;
    int n_theta = 8;

    void validate() const;

    bool operator==(const ControlParams&) const = default;
};

/// A candidate next position for an agent.
struct ControlAction {
    AgentState target;

    bool operator==(const ControlAction&) const = default;
};

/// Samples the next target state. Same as `mp.step(x, rng)`.
TargetState target_step(const TargetState& x, const MotionParams& mp, Rng& rng);

double transition_density(const TargetState& x_next, const TargetState& x, const MotionParams& mp);

/// Admissible moves from `s`: the stay action first, then rings of increasing
/// radius with angles in generation order. Duplicates and positions outside
/// `area` are removed.
std::vector<ControlAction> admissible_controls(const AgentState& s, const ControlParams& cp,
                                               const Rect& area);

/// Piecewise-linear detection probability: pd_max inside r0, then decaying
/// linearly with slope eta down to zero.
double detection_prob(double distance, const SensingParams& sp);
double detection_prob(const Position& p, const AgentState& s, const SensingParams& sp);
inline double detection_prob(const TargetState& x, const AgentState& s, const SensingParams& sp) {
    return detection_prob(position_of(x), s, sp);
}

/// Bearing is atan2(sy - py, sx - px), the four-quadrant form of
/// arctan((sy - py) / (sx - px)); range is the Euclidean distance.
/// Throws CoincidentPositions when the range is zero.
Measurement noise_free_measurement(const TargetState& x, const AgentState& s);

/// Noise-free measurement plus independent Gaussian bearing and range noise
/// whose standard deviations grow with distance.
Measurement measure(const TargetState& x, const AgentState& s, const SensingParams& sp, Rng& rng);

/// Product of the bearing density (with the residual wrapped into (-pi, pi])
/// and the range density.
double likelihood(const Measurement& z, const TargetState& x, const AgentState& s,
                  const SensingParams& sp);

/// Natural log of `likelihood`, or -infinity when target and agent coincide.
/// Does not throw; used on particle clouds.
double log_likelihood_or_neg_inf(const Measurement& z, const Position& target, const AgentState& s,
                                 const SensingParams& sp) noexcept;

}  // namespace searchtrack
