#pragma once

#include <string>
#include <utility>
#include <vector>

#include "caprox/random.hpp"

namespace caprox {

inline constexpr double kDefaultStiffnessNPerCm = 10.0;
inline constexpr double kClothThicknessCm = 0.5;  // sleeve fabric over the arm

// Arm geometry: surface height along x (fist at x=0, shoulder at x=length)
// is fist_height + contour(x) + tilt * (1 - x/length). Contour knots are
// (fraction of length, offset cm) pairs, piecewise-linear.
struct ArmModel {
    std::string id = "default";
    double length = 70.0;       // cm, fist to shoulder
    double fist_height = 70.0;  // cm above the world origin
    std::vector<std::pair<double, double>> contour = default_contour();
    // Per-subject shift of the effective capacitive plane relative to the
    // geometric skin (dielectric variation). Offsets the sensed distance,
    // never the true geometry.
    double sensed_surface_offset = 0.0;

    static std::vector<std::pair<double, double>> default_contour();
    void validate() const;
    double contour_offset(double x_cm) const;  // piecewise-linear, x clamped to [0, length]
};

// Height of the arm surface at x under the given tilt. Tilt is the fist-height
// delta of a rotation about the shoulder, so it fades linearly to zero at
// x = length. x outside [0, length] is an error.
double surface_height(const ArmModel& arm, double tilt_cm, double x_cm);

enum class MotionKind { static_arm, scripted_tilt, random_tilt };

struct MotionProfile {
    MotionKind kind = MotionKind::static_arm;
    double amplitude = 20.0;   // cm, tilt clip
    double rate_limit = 2.3;   // cm/s, max |d tilt / dt|
    double period_s = 10.0;    // scripted triangle period
    double tau_v = 3.0;        // s, random-tilt velocity mean-reversion time
    double sigma_v = 2.4;      // cm/s, random-tilt velocity volatility
    std::uint64_t seed = 0;

    static MotionProfile static_arm();
    static MotionProfile scripted(double amplitude = 20.0, double period_s = 10.0);
    static MotionProfile random(double amplitude = 20.0, std::uint64_t seed = 0);
    void validate() const;
};

struct MotionState {
    double tilt = 0.0;
    double tilt_vel = 0.0;
};

// Advances the tilt by one step of dt seconds; returns the new tilt.
// Random-tilt integrates a mean-reverting (OU) velocity clamped to
// rate_limit, then clips tilt to +/- amplitude, so increments are smooth and
// both bounds hold for every seed.
double step_motion(const MotionProfile& profile, MotionState& state, double t, double dt,
                   Rng& rng);

// Linear spring, compression only.
double contact_force(double penetration_cm, double stiffness_n_per_cm = kDefaultStiffnessNPerCm);

struct GarmentConfig {
    std::string name = "gown";
    double capture_low = 1.0;    // cm offset from fist
    double capture_high = 12.0;  // cm offset from fist
    // The sleeve opening trails the end effector by this fraction of arm
    // length; crossing the fist with the opening is the capture moment.
    double sleeve_length_factor = 0.5;

    static GarmentConfig gown();
    static GarmentConfig cardigan();
    void validate() const;
};

enum class Outcome { success, caught, missed, halted, incomplete };

const char* outcome_name(Outcome o);
Outcome outcome_from_name(const std::string& name);

// Draws a synthetic subject: length uniform in [65, 76] cm, contour knots
// jittered (sigma 0.2 cm, fist knot anchored), sensed-surface offset
// N(0, 0.12^2) cm.
ArmModel make_subject(int index, Rng& rng);

}  // namespace caprox
