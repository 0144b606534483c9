#include "searchtrack/models.hpp"

#include "searchtrack/errors.hpp"

#include <algorithm>
#include <limits>

namespace searchtrack {

namespace {

constexpr double kCovarianceJitter = 1e-9;
constexpr double kDuplicateTol = 1e-9;

Eigen::Matrix4d psd_factor(const Eigen::Matrix4d& Q) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(Q);
    Eigen::Vector4d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

MotionParams MotionParams::constant_velocity(double T, double survival) {
    Eigen::Matrix4d F;
    F << 1, T, 0, 0,
         0, 1, 0, 0,
         0, 0, 1, T,
         0, 0, 0, 1;
    Eigen::Matrix4d Q;
    Q << T / 3, T / 2, 0, 0,
         T / 2, T, 0, 0,
         0, 0, T / 3, T / 2,
         0, 0, T / 2, T;
    return MotionParams(F, Q, survival, T);
}

MotionParams::MotionParams(Eigen::Matrix4d F, Eigen::Matrix4d Q, double survival, double T)
    : F_(std::move(F)), Q_(std::move(Q)), survival_(survival), T_(T) {
    if (!(survival_ >= 0.0 && survival_ <= 1.0))
        throw ValidationError("motion.survival", "survival probability pS must lie in [0, 1]");
    if (!(T_ > 0.0) || !std::isfinite(T_)) throw ValidationError("motion.T", "must be positive");
    if (!F_.allFinite()) throw ValidationError("motion.F", "must be finite");
    if (!Q_.allFinite() || !Q_.isApprox(Q_.transpose(), 1e-12))
        throw ValidationError("motion.Q", "must be finite and symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(Q_);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, Q_.norm()))
        throw ValidationError("motion.Q", "must be positive semi-definite");
    sample_factor_ = psd_factor(Q_);
}

MotionParams MotionParams::with_noise_scale(double factor) const {
    if (!(factor >= 0.0)) throw ValidationError("truth.process_noise_scale", "must be non-negative");
    return MotionParams(F_, Q_ * factor, survival_, T_);
}

MotionParams MotionParams::with_survival(double survival) const { return MotionParams(F_, Q_, survival, T_); }

TargetState MotionParams::mean_step(const TargetState& x) const { return TargetState::from_vec(F_ * x.vec()); }

TargetState MotionParams::step(const TargetState& x, Rng& rng) const {
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::Vector4d e;
    for (int i = 0; i < 4; ++i) e(i) = n01(rng);
    return TargetState::from_vec(F_ * x.vec() + sample_factor_ * e);
}

double MotionParams::transition_density(const TargetState& x_next, const TargetState& x) const {
    Eigen::LLT<Eigen::Matrix4d> llt(Q_);
    if (llt.info() != Eigen::Success) {
        llt.compute(Q_ + kCovarianceJitter * Eigen::Matrix4d::Identity());
        if (llt.info() != Eigen::Success) throw SingularCovariance("process covariance is not invertible");
    }
    const Eigen::Vector4d r = x_next.vec() - F_ * x.vec();
    const Eigen::Vector4d w = llt.matrixL().solve(r);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double log_norm = -2.0 * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
    return std::exp(log_norm - 0.5 * w.squaredNorm());
}

void SensingParams::validate() const {
    if (!(pd_max > 0.0 && pd_max <= 1.0)) throw ValidationError("sensing.pd_max", "must lie in (0, 1]");
    if (!(r0 > 0.0)) throw ValidationError("sensing.r0", "must be positive");
    if (!(eta >= 0.0)) throw ValidationError("sensing.eta", "must be non-negative");
    if (!(phi0 > 0.0)) throw ValidationError("sensing.phi0", "must be positive");
    if (!(beta_phi >= 0.0)) throw ValidationError("sensing.beta_phi", "must be non-negative");
    if (!(zeta0 > 0.0)) throw ValidationError("sensing.zeta0", "must be positive");
    if (!(beta_zeta >= 0.0)) throw ValidationError("sensing.beta_zeta", "must be non-negative");
    if (!(clutter_rate >= 0.0) || !std::isfinite(clutter_rate))
        throw ValidationError("sensing.clutter_rate", "must be non-negative");
}

void ControlParams::validate() const {
    if (!(delta_r > 0.0)) throw ValidationError("control.delta_r", "must be positive");
    if (n_r < 0) throw ValidationError("control.n_r", "must be non-negative");
    if (n_theta < 1) throw ValidationError("control.n_theta", "must be at least 1");
}

TargetState target_step(const TargetState& x, const MotionParams& mp, Rng& rng) { return mp.step(x, rng); }

double transition_density(const TargetState& x_next, const TargetState& x, const MotionParams& mp) {
    return mp.transition_density(x_next, x);
}

std::vector<ControlAction> admissible_controls(const AgentState& s, const ControlParams& cp, const Rect& area) {
    const double dtheta = 2.0 * std::numbers::pi / cp.n_theta;
    std::vector<ControlAction> out;
    out.reserve(1 + static_cast<std::size_t>(cp.n_r) * cp.n_theta);
    for (int l1 = 0; l1 <= cp.n_r; ++l1) {
        for (int l2 = 0; l2 <= cp.n_theta; ++l2) {
            const double radius = l1 * cp.delta_r;
            const Position p{s.x + radius * std::cos(l2 * dtheta), s.y + radius * std::sin(l2 * dtheta)};
            if (!area.contains(p)) continue;
            const bool duplicate = std::any_of(out.begin(), out.end(), [&](const ControlAction& a) {
                return std::abs(a.target.x - p.x) < kDuplicateTol && std::abs(a.target.y - p.y) < kDuplicateTol;
            });
            if (!duplicate) out.push_back({p});
        }
    }
    return out;
}

double detection_prob(double d, const SensingParams& sp) {
    if (d < sp.r0) return sp.pd_max;
    return std::max(0.0, sp.pd_max - sp.eta * (d - sp.r0));
}

double detection_prob(const Position& p, const AgentState& s, const SensingParams& sp) {
    return detection_prob(distance(p, s), sp);
}

Measurement noise_free_measurement(const TargetState& x, const AgentState& s) {
    const double dx = s.x - x.px;
    const double dy = s.y - x.py;
    const double range = std::hypot(dx, dy);
    if (range == 0.0) throw CoincidentPositions("target coincides with agent position");
    return {wrap_angle(std::atan2(dy, dx)), range};
}

Measurement measure(const TargetState& x, const AgentState& s, const SensingParams& sp, Rng& rng) {
    const Measurement h = noise_free_measurement(x, s);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double e_bearing = n01(rng);
    const double e_range = n01(rng);
    // Range is a distance; the rare negative draw at very short range is clamped.
    return {wrap_angle(h.bearing + sp.bearing_std(h.range) * e_bearing),
            std::max(0.0, h.range + sp.range_std(h.range) * e_range)};
}

double likelihood(const Measurement& z, const TargetState& x, const AgentState& s, const SensingParams& sp) {
    (void)noise_free_measurement(x, s);
    return std::exp(log_likelihood_or_neg_inf(z, position_of(x), s, sp));
}

double log_likelihood_or_neg_inf(const Measurement& z, const Position& target, const AgentState& s,
                                 const SensingParams& sp) noexcept {
    const double dx = s.x - target.x;
    const double dy = s.y - target.y;
    const double range = std::hypot(dx, dy);
    if (range == 0.0) return -std::numeric_limits<double>::infinity();
    const double sb = sp.bearing_std(range);
    const double sr = sp.range_std(range);
    const double eb = wrap_angle(z.bearing - std::atan2(dy, dx)) / sb;
    const double er = (z.range - range) / sr;
    return -std::log(2.0 * std::numbers::pi * sb * sr) - 0.5 * (eb * eb + er * er);
}

}  // namespace searchtrack
