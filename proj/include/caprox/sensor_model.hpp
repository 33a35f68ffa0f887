#pragma once

#include <string>

#include "caprox/random.hpp"

namespace caprox {

inline constexpr double kContactDistanceCm = 0.5;   // estimates below this mean contact
inline constexpr double kDistanceFloorCm = 0.1;     // estimator clamp floor
inline constexpr double kDefaultRangeMaxCm = 10.0;  // max sensing range / estimator ceiling
inline constexpr double kMaxSampleRateHz = 200.0;

// Generative constants for one material under the electrode. delta_c(d) =
// alpha_true/d - beta_true for d <= range_max, plateauing at the range_max
// value beyond (far readings are mutually indistinguishable).
struct MaterialProfile {
    std::string name;
    double alpha_true = 0.0;  // counts * cm
    double beta_true = 0.0;   // counts
    double range_max = kDefaultRangeMaxCm;
    double noise_sigma = 0.0;  // additive white Gaussian, in counts

    void validate() const;
};

// Bundled profiles. The arm noise level is tuned so a default calibration
// sweep fits with R^2 around 0.969; the gown curve sits more than
// 3*(sigma_arm + sigma_gown) below the arm curve everywhere in range, which
// is what makes the two materials distinguishable.
MaterialProfile human_arm_profile();
MaterialProfile gown_on_table_profile();

struct SensorConfig {
    double sample_rate = 100.0;          // Hz
    double emi_bias = 0.0;               // counts, additive startup disturbance
    double clothing_attenuation = 1.0;   // (0, 1], scales the material signal

    void validate() const;
};

struct DeltaCSample {
    double t = 0.0;        // seconds
    double delta_c = 0.0;  // counts, baseline-subtracted, >= 0
    bool saturated = false;
};

// Fitted constants of the distance law d(dc) = alpha/(dc + beta).
struct CalibrationModel {
    double alpha = 0.0;  // counts * cm
    double beta = 0.0;   // counts
    double r_squared = 0.0;
    long n_samples = 0;

    bool fitted() const { return alpha > 0.0; }
};

// True distance -> noisy delta-C counts. Distances beyond profile.range_max
// draw from the at-range distribution and set the saturated flag.
DeltaCSample forward_delta_c(double true_distance_cm, const MaterialProfile& profile,
                             const SensorConfig& config, Rng& rng, double t = 0.0);

// delta-C -> distance via the fitted law, clamped to [floor, ceiling].
// Non-positive denominator maps to the ceiling (far).
double estimate_distance(double delta_c, const CalibrationModel& model,
                         double d_floor = kDistanceFloorCm,
                         double d_ceiling = kDefaultRangeMaxCm);

// Contact means the floor-unclamped estimate falls below kContactDistanceCm.
bool detect_contact(double delta_c, const CalibrationModel& model);

}  // namespace caprox
