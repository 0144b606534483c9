#include "searchtrack/filter.hpp"

#include "searchtrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace searchtrack::filter {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Measurement components whose normalizer falls below this are dropped.
const double kLogUnderflow = std::log(1e-300);
constexpr double kOddsFloor = 1e-12;

/// Per-particle quantities that do not depend on the measurement.
struct ParticleGeometry {
    double bearing;    // predicted bearing from the agent
    double range;      // predicted range
    double inv_sb;     // 1 / bearing std
    double inv_sr;     // 1 / range std
    double log_norm;   // -log(2 pi sb sr) + log pD, or -inf when undetectable
};

/// Everything the update needs, flattened over all predicted components.
struct UpdateTerms {
    std::vector<std::size_t> offsets;      // component i owns particles [offsets[i], offsets[i+1])
    std::vector<ParticleGeometry> geometry;
    std::vector<double> pd;                // detection probability per particle
    std::vector<double> detect_mean;       // <p_i, pD>
};

UpdateTerms precompute(const MultiBernoulliDensity& predictive, const AgentState& s, const SensingParams& sp) {
    UpdateTerms t;
    t.offsets.reserve(predictive.size() + 1);
    t.offsets.push_back(0);
    for (const auto& c : predictive.components) t.offsets.push_back(t.offsets.back() + c.particles.size());
    t.geometry.resize(t.offsets.back());
    t.pd.resize(t.offsets.back());
    t.detect_mean.resize(predictive.size());

    for (std::size_t i = 0; i < predictive.size(); ++i) {
        const auto& c = predictive.components[i];
        double mean = 0.0;
        for (std::size_t j = 0; j < c.particles.size(); ++j) {
            const std::size_t k = t.offsets[i] + j;
            const double dx = s.x - c.particles[j].px;
            const double dy = s.y - c.particles[j].py;
            const double range = std::hypot(dx, dy);
            const double pd = detection_prob(range, sp);
            t.pd[k] = pd;
            mean += c.weights[j] * pd;
            auto& g = t.geometry[k];
            g.range = range;
            if (range == 0.0 || pd <= 0.0) {
                g.bearing = 0.0;
                g.inv_sb = g.inv_sr = 0.0;
                g.log_norm = kNegInf;
                continue;
            }
            const double sb = sp.bearing_std(range);
            const double sr = sp.range_std(range);
            g.bearing = std::atan2(dy, dx);
            g.inv_sb = 1.0 / sb;
            g.inv_sr = 1.0 / sr;
            g.log_norm = std::log(pd) - std::log(2.0 * std::numbers::pi * sb * sr);
        }
        t.detect_mean[i] = std::clamp(mean, 0.0, 1.0);
    }
    return t;
}

// exp of anything below this is exactly zero in double precision.
constexpr double kExpUnderflow = -746.0;

/// Wraps a difference of two angles in (-pi, pi] into (-pi, pi].
inline double wrap_difference(double d) {
    constexpr double pi = std::numbers::pi;
    if (d > pi) return d - 2.0 * pi;
    if (d <= -pi) return d + 2.0 * pi;
    return d;
}

/// log L^z(x) = log g(z | x) + log pD(x) for one particle.
inline double log_detection_likelihood(const Measurement& z, const ParticleGeometry& g) {
    if (g.log_norm == kNegInf) return kNegInf;
    const double eb = wrap_difference(z.bearing - g.bearing) * g.inv_sb;
    const double er = (z.range - g.range) * g.inv_sr;
    return g.log_norm - 0.5 * (eb * eb + er * er);
}

double legacy_existence(double r, double detect_mean) {
    const double denom = 1.0 - r * detect_mean;
    if (denom <= 0.0) return 0.0;
    return std::clamp(r * (1.0 - detect_mean) / denom, 0.0, 1.0);
}

/// Result of processing one measurement against the predicted components.
struct MeasurementTerms {
    bool degenerate = true;
    double existence = 0.0;
    bool clamped = false;
    double log_shift = kNegInf;     // M: all likelihoods below are scaled by exp(-M)
    std::vector<double> log_l;      // per particle log L^z
};

MeasurementTerms measurement_terms(const MultiBernoulliDensity& predictive, const UpdateTerms& t,
                                   const Measurement& z, double kappa) {
    MeasurementTerms m;
    m.log_l.resize(t.geometry.size());
    for (std::size_t k = 0; k < t.geometry.size(); ++k) {
        m.log_l[k] = log_detection_likelihood(z, t.geometry[k]);
        m.log_shift = std::max(m.log_shift, m.log_l[k]);
    }
    if (m.log_shift == kNegInf) return m;

    double numer = 0.0;       // scaled sum in the existence numerator
    double denom = 0.0;       // scaled sum in the existence denominator
    double normalizer = 0.0;  // scaled sum of odds-weighted <p, L^z>
    for (std::size_t i = 0; i < predictive.size(); ++i) {
        const auto& c = predictive.components[i];
        double inner = 0.0;  // <p_i, L^z> exp(-M)
        for (std::size_t j = 0; j < c.particles.size(); ++j) {
            const double l = m.log_l[t.offsets[i] + j] - m.log_shift;
            if (l < kExpUnderflow) continue;
            inner += c.weights[j] * std::exp(l);
        }
        const double r = c.existence;
        const double one_minus = std::max(1.0 - r * t.detect_mean[i], kOddsFloor);
        numer += r * (1.0 - r) * inner / (one_minus * one_minus);
        denom += r * inner / one_minus;
        normalizer += r / std::max(1.0 - r, kOddsFloor) * inner;
    }
    if (!(normalizer > 0.0) || m.log_shift + std::log(normalizer) < kLogUnderflow) return m;

    // kappa exp(-M) may overflow when every likelihood is tiny; the existence then tends to 0.
    double scaled_kappa = 0.0;
    if (kappa > 0.0) {
        const double log_scaled = std::log(kappa) - m.log_shift;
        scaled_kappa = log_scaled > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(log_scaled);
    }
    double r = (std::isinf(scaled_kappa) || scaled_kappa + denom <= 0.0) ? 0.0 : numer / (scaled_kappa + denom);
    if (r > 1.0) {
        r = 1.0;
        m.clamped = true;
    }
    m.existence = std::max(r, 0.0);
    m.degenerate = false;
    return m;
}

}  // namespace

TargetState BernoulliComponent::mean() const {
    Eigen::Vector4d acc = Eigen::Vector4d::Zero();
    double total = 0.0;
    for (std::size_t j = 0; j < particles.size(); ++j) {
        acc += weights[j] * particles[j].vec();
        total += weights[j];
    }
    return TargetState::from_vec(total > 0.0 ? Eigen::Vector4d(acc / total) : acc);
}

void BernoulliComponent::validate() const {
    if (!(existence >= 0.0 && existence <= 1.0)) throw ValidationError("existence", "must lie in [0, 1]");
    if (particles.empty() || particles.size() != weights.size())
        throw ValidationError("particles", "particles and weights must have equal, non-zero length");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("weights", "must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("weights", "must sum to 1");
}

void BirthModel::validate() const {
    if (count < 0) throw ValidationError("filter.birth.count", "must be non-negative");
    if (!(existence >= 0.0 && existence < 0.5)) throw ValidationError("filter.birth.existence", "must lie in [0, 0.5)");
    if (!(velocity_std >= 0.0)) throw ValidationError("filter.birth.velocity_std", "must be non-negative");
    if (particles < 1) throw ValidationError("filter.birth.particles", "must be at least 1");
}

void FilterParams::validate() const {
    if (particles < 1) throw ValidationError("filter.particles", "must be at least 1");
    if (!(prune_threshold >= 0.0 && prune_threshold <= 1.0))
        throw ValidationError("filter.prune_threshold", "must lie in [0, 1]");
    if (max_components < 1) throw ValidationError("filter.max_components", "must be at least 1");
    birth.validate();
}

double clutter_intensity(const SensingParams& sp, const Rect& area) {
    return sp.clutter_rate / (2.0 * std::numbers::pi * area.diagonal());
}

MultiBernoulliDensity predict(const MultiBernoulliDensity& posterior, const MotionParams& mp,
                              const BirthModel& birth, const Rect& area, Rng& rng) {
    MultiBernoulliDensity out;
    out.components.reserve(posterior.size() + static_cast<std::size_t>(birth.count));
    // Survival does not depend on the state, so the spatial density is a pure propagation.
    for (const auto& c : posterior.components) {
        BernoulliComponent p;
        p.existence = c.existence * mp.survival();
        p.weights = c.weights;
        p.particles.reserve(c.particles.size());
        for (const auto& x : c.particles) p.particles.push_back(mp.step(x, rng));
        out.components.push_back(std::move(p));
    }

    std::uniform_real_distribution<double> ux(area.xmin, area.xmax);
    std::uniform_real_distribution<double> uy(area.ymin, area.ymax);
    std::normal_distribution<double> nv(0.0, 1.0);
    const auto n = static_cast<std::size_t>(birth.particles);
    for (int b = 0; b < birth.count; ++b) {
        BernoulliComponent c;
        c.existence = birth.existence;
        c.particles.reserve(n);
        for (std::size_t j = 0; j < n; ++j) {
            TargetState x;
            x.px = ux(rng);
            x.py = uy(rng);
            x.vx = birth.velocity_std * nv(rng);
            x.vy = birth.velocity_std * nv(rng);
            c.particles.push_back(x);
        }
        c.weights.assign(n, 1.0 / static_cast<double>(n));
        out.components.push_back(std::move(c));
    }
    return out;
}

MultiBernoulliDensity update(const MultiBernoulliDensity& predictive, std::span<const Measurement> measurements,
                             const AgentState& s, const SensingParams& sp, const Rect& area,
                             UpdateDiagnostics* diagnostics) {
    const UpdateTerms t = precompute(predictive, s, sp);
    MultiBernoulliDensity out;
    out.components.reserve(predictive.size() + measurements.size());

    for (std::size_t i = 0; i < predictive.size(); ++i) {
        const auto& c = predictive.components[i];
        BernoulliComponent legacy;
        legacy.existence = legacy_existence(c.existence, t.detect_mean[i]);
        legacy.particles = c.particles;
        legacy.weights.resize(c.weights.size());
        double total = 0.0;
        for (std::size_t j = 0; j < c.weights.size(); ++j) {
            legacy.weights[j] = c.weights[j] * (1.0 - t.pd[t.offsets[i] + j]);
            total += legacy.weights[j];
        }
        if (total > 0.0) {
            for (double& w : legacy.weights) w /= total;
        } else {
            legacy.weights = c.weights;  // certain detection everywhere; shape is irrelevant
        }
        out.components.push_back(std::move(legacy));
    }

    const double kappa = clutter_intensity(sp, area);
    for (const auto& z : measurements) {
        MeasurementTerms m = measurement_terms(predictive, t, z, kappa);
        if (m.degenerate) {
            if (diagnostics) ++diagnostics->dropped_degenerate;
            continue;
        }
        if (m.clamped && diagnostics) ++diagnostics->clamped_existence;
        BernoulliComponent mc;
        mc.existence = m.existence;
        double total = 0.0;
        for (std::size_t i = 0; i < predictive.size(); ++i) {
            const auto& c = predictive.components[i];
            const double odds = c.existence / std::max(1.0 - c.existence, kOddsFloor);
            for (std::size_t j = 0; j < c.particles.size(); ++j) {
                const double l = m.log_l[t.offsets[i] + j] - m.log_shift;
                if (l < kExpUnderflow) continue;
                const double w = odds * c.weights[j] * std::exp(l);
                if (w <= 0.0) continue;
                mc.particles.push_back(c.particles[j]);
                mc.weights.push_back(w);
                total += w;
            }
        }
        if (!(total > 0.0)) {
            if (diagnostics) ++diagnostics->dropped_degenerate;
            continue;
        }
        for (double& w : mc.weights) w /= total;
        out.components.push_back(std::move(mc));
    }
    return out;
}

std::vector<double> update_existence(const MultiBernoulliDensity& predictive,
                                     std::span<const Measurement> measurements, const AgentState& s,
                                     const SensingParams& sp, const Rect& area, UpdateDiagnostics* diagnostics) {
    const UpdateTerms t = precompute(predictive, s, sp);
    std::vector<double> out;
    out.reserve(predictive.size() + measurements.size());
    for (std::size_t i = 0; i < predictive.size(); ++i)
        out.push_back(legacy_existence(predictive.components[i].existence, t.detect_mean[i]));
    const double kappa = clutter_intensity(sp, area);
    for (const auto& z : measurements) {
        const MeasurementTerms m = measurement_terms(predictive, t, z, kappa);
        if (m.degenerate) {
            if (diagnostics) ++diagnostics->dropped_degenerate;
            continue;
        }
        if (m.clamped && diagnostics) ++diagnostics->clamped_existence;
        out.push_back(m.existence);
    }
    return out;
}

CardinalityStats cardinality(std::span<const double> existences) {
    CardinalityStats s;
    for (double r : existences) {
        s.mean += r;
        s.variance += r * (1.0 - r);
    }
    s.rounded = std::lround(s.mean);
    return s;
}

CardinalityStats cardinality(const MultiBernoulliDensity& d) {
    std::vector<double> r;
    r.reserve(d.size());
    for (const auto& c : d.components) r.push_back(c.existence);
    return cardinality(r);
}

namespace {

std::vector<std::size_t> order_by_existence(const MultiBernoulliDensity& d) {
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return d.components[a].existence > d.components[b].existence;
    });
    return idx;
}

}  // namespace

std::vector<TargetState> extract_states(const MultiBernoulliDensity& d, std::size_t n) {
    const auto idx = order_by_existence(d);
    std::vector<TargetState> out;
    const std::size_t k = std::min(n, idx.size());
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(d.components[idx[i]].mean());
    return out;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n, Rng& rng) {
    std::vector<std::size_t> out;
    out.reserve(n);
    if (weights.empty() || n == 0) return out;
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double step = total / static_cast<double>(n);
    double target = u(rng) * step;
    double cumulative = weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (target > cumulative && j + 1 < weights.size()) cumulative += weights[++j];
        out.push_back(j);
        target += step;
    }
    return out;
}

MultiBernoulliDensity prune(const MultiBernoulliDensity& d, double prune_threshold, std::size_t max_components,
                            std::size_t particles, Rng& rng) {
    std::vector<std::size_t> keep;
    for (std::size_t idx : order_by_existence(d)) {
        if (keep.size() == max_components) break;
        if (d.components[idx].existence >= prune_threshold) keep.push_back(idx);
    }
    std::sort(keep.begin(), keep.end());

    MultiBernoulliDensity out;
    out.components.reserve(keep.size());
    for (std::size_t idx : keep) {
        const auto& c = d.components[idx];
        BernoulliComponent r;
        r.existence = c.existence;
        r.particles.reserve(particles);
        for (std::size_t j : systematic_resample(c.weights, particles, rng)) r.particles.push_back(c.particles[j]);
        r.weights.assign(particles, 1.0 / static_cast<double>(particles));
        out.components.push_back(std::move(r));
    }
    return out;
}

}  // namespace searchtrack::filter
