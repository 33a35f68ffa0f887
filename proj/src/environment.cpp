#include "caprox/environment.hpp"

#include <algorithm>
#include <cmath>

#include "caprox/errors.hpp"

namespace caprox {

std::vector<std::pair<double, double>> ArmModel::default_contour() {
    // Fist reference, wrist dip, forearm taper, elbow bump, upper arm.
    return {{0.00, 0.0}, {0.08, -0.5}, {0.15, -1.8}, {0.35, -0.8},
            {0.50, 0.0}, {0.68, 1.2},  {0.80, 0.8},  {1.00, 1.0}};
}

void ArmModel::validate() const {
    if (length < 50.0 || length > 100.0)
        throw ConfigError("arm '" + id + "': length must be in [50, 100] cm");
    if (contour.size() < 2) throw ConfigError("arm '" + id + "': contour needs >= 2 knots");
    double prev = -1.0;
    for (const auto& [frac, off] : contour) {
        if (frac < 0.0 || frac > 1.0 || frac <= prev)
            throw ConfigError("arm '" + id + "': contour fractions must ascend within [0, 1]");
        if (std::abs(off) > 5.0)
            throw ConfigError("arm '" + id + "': contour offsets must stay within +/-5 cm");
        prev = frac;
    }
}

double ArmModel::contour_offset(double x_cm) const {
    double f = std::clamp(x_cm / length, 0.0, 1.0);
    if (f <= contour.front().first) return contour.front().second;
    for (std::size_t i = 1; i < contour.size(); ++i) {
        if (f <= contour[i].first) {
            const auto& [f0, y0] = contour[i - 1];
            const auto& [f1, y1] = contour[i];
            return y0 + (y1 - y0) * (f - f0) / (f1 - f0);
        }
    }
    return contour.back().second;
}

double surface_height(const ArmModel& arm, double tilt_cm, double x_cm) {
    if (x_cm < 0.0 || x_cm > arm.length)
        throw PreconditionError("surface_height: x outside [0, arm length]");
    return arm.fist_height + arm.contour_offset(x_cm) + tilt_cm * (1.0 - x_cm / arm.length);
}

MotionProfile MotionProfile::static_arm() { return {}; }

MotionProfile MotionProfile::scripted(double amplitude, double period_s) {
    MotionProfile p;
    p.kind = MotionKind::scripted_tilt;
    p.amplitude = amplitude;
    p.period_s = period_s;
    // Default admits the full triangle slope (4*amp/period = 8 cm/s at
    // defaults); a tighter limit turns the waveform trapezoidal.
    p.rate_limit = 8.0;
    return p;
}

MotionProfile MotionProfile::random(double amplitude, std::uint64_t seed) {
    MotionProfile p;
    p.kind = MotionKind::random_tilt;
    p.amplitude = amplitude;
    p.seed = seed;
    return p;
}

void MotionProfile::validate() const {
    if (amplitude < 0.0 || amplitude > 20.0)
        throw ConfigError("motion amplitude must be in [0, 20] cm");
    if (rate_limit <= 0.0) throw ConfigError("motion rate_limit must be > 0");
    if (kind == MotionKind::scripted_tilt && period_s <= 0.0)
        throw ConfigError("scripted motion period must be > 0");
    if (kind == MotionKind::random_tilt && (tau_v <= 0.0 || sigma_v < 0.0))
        throw ConfigError("random motion needs tau_v > 0 and sigma_v >= 0");
}

double step_motion(const MotionProfile& profile, MotionState& state, double t, double dt,
                   Rng& rng) {
    if (dt <= 0.0) throw PreconditionError("step_motion: dt must be > 0");
    switch (profile.kind) {
        case MotionKind::static_arm:
            state.tilt = 0.0;
            break;
        case MotionKind::scripted_tilt: {
            // Rate-limited tracking of a triangle wave 0 -> +A -> -A -> 0.
            double phase = std::fmod(t + dt, profile.period_s) / profile.period_s;
            double target;
            if (phase < 0.25)
                target = 4.0 * phase * profile.amplitude;
            else if (phase < 0.75)
                target = (2.0 - 4.0 * phase) * profile.amplitude;
            else
                target = (4.0 * phase - 4.0) * profile.amplitude;
            double step = std::clamp(target - state.tilt, -profile.rate_limit * dt,
                                     profile.rate_limit * dt);
            state.tilt += step;
            break;
        }
        case MotionKind::random_tilt: {
            double g = rng.gaussian();
            state.tilt_vel += (-state.tilt_vel / profile.tau_v) * dt +
                              profile.sigma_v * std::sqrt(2.0 * dt / profile.tau_v) * g;
            state.tilt_vel = std::clamp(state.tilt_vel, -profile.rate_limit, profile.rate_limit);
            state.tilt = std::clamp(state.tilt + state.tilt_vel * dt, -profile.amplitude,
                                    profile.amplitude);
            break;
        }
    }
    return state.tilt;
}

double contact_force(double penetration_cm, double stiffness_n_per_cm) {
    if (stiffness_n_per_cm <= 0.0)
        throw PreconditionError("contact_force: stiffness must be > 0");
    return std::max(0.0, penetration_cm) * stiffness_n_per_cm;
}

GarmentConfig GarmentConfig::gown() { return {"gown", 1.0, 12.0, 0.5}; }

GarmentConfig GarmentConfig::cardigan() { return {"cardigan", 1.0, 7.0, 0.7}; }

void GarmentConfig::validate() const {
    if (!(capture_low < capture_high) || !std::isfinite(capture_low) ||
        !std::isfinite(capture_high))
        throw ConfigError("garment '" + name + "': capture band must be finite with low < high");
    if (sleeve_length_factor <= 0.0 || sleeve_length_factor > 1.0)
        throw ConfigError("garment '" + name + "': sleeve_length_factor must be in (0, 1]");
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::success: return "success";
        case Outcome::caught: return "caught";
        case Outcome::missed: return "missed";
        case Outcome::halted: return "halted";
        case Outcome::incomplete: return "incomplete";
    }
    return "unknown";
}

Outcome outcome_from_name(const std::string& name) {
    for (Outcome o : {Outcome::success, Outcome::caught, Outcome::missed, Outcome::halted,
                      Outcome::incomplete})
        if (name == outcome_name(o)) return o;
    throw ConfigError("unknown outcome name '" + name + "'");
}

ArmModel make_subject(int index, Rng& rng) {
    ArmModel arm;
    arm.id = "s" + std::to_string(index);
    arm.length = rng.uniform(65.0, 76.0);
    for (std::size_t i = 1; i < arm.contour.size(); ++i)  // fist knot stays the reference
        arm.contour[i].second += rng.gaussian(0.0, 0.2);
    arm.sensed_surface_offset = rng.gaussian(0.0, 0.12);
    arm.validate();
    return arm;
}

}  // namespace caprox
