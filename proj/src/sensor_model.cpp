#include "caprox/sensor_model.hpp"

#include <algorithm>

#include "caprox/errors.hpp"

namespace caprox {

void MaterialProfile::validate() const {
    if (alpha_true <= 0.0) throw ConfigError("material '" + name + "': alpha_true must be > 0");
    if (beta_true < 0.0) throw ConfigError("material '" + name + "': beta_true must be >= 0");
    if (range_max <= 0.0) throw ConfigError("material '" + name + "': range_max must be > 0");
    if (noise_sigma < 0.0) throw ConfigError("material '" + name + "': noise_sigma must be >= 0");
}

void SensorConfig::validate() const {
    if (sample_rate <= 0.0 || sample_rate > kMaxSampleRateHz)
        throw ConfigError("sample_rate must be in (0, 200] Hz");
    if (clothing_attenuation <= 0.0 || clothing_attenuation > 1.0)
        throw ConfigError("clothing_attenuation must be in (0, 1]");
}

MaterialProfile human_arm_profile() {
    return {"human_arm", 84.38, 4.681, kDefaultRangeMaxCm, 1.03};
}

MaterialProfile gown_on_table_profile() {
    return {"gown_on_table", 12.0, 2.0, kDefaultRangeMaxCm, 0.2};
}

DeltaCSample forward_delta_c(double true_distance_cm, const MaterialProfile& profile,
                             const SensorConfig& config, Rng& rng, double t) {
    if (true_distance_cm <= 0.0)
        throw PreconditionError("forward_delta_c: true distance must be > 0 cm");
    bool saturated = true_distance_cm > profile.range_max;
    double d_eff = saturated ? profile.range_max : true_distance_cm;
    double signal = profile.alpha_true / d_eff - profile.beta_true;
    double dc = config.clothing_attenuation * signal + config.emi_bias +
                rng.gaussian(0.0, profile.noise_sigma);
    return {t, std::max(0.0, dc), saturated};
}

double estimate_distance(double delta_c, const CalibrationModel& model, double d_floor,
                         double d_ceiling) {
    if (!model.fitted()) throw ConfigError("estimate_distance: calibration model not fitted");
    double den = delta_c + model.beta;
    if (den <= 0.0) return d_ceiling;
    return std::clamp(model.alpha / den, d_floor, d_ceiling);
}

bool detect_contact(double delta_c, const CalibrationModel& model) {
    if (!model.fitted()) throw ConfigError("detect_contact: calibration model not fitted");
    double den = delta_c + model.beta;
    if (den <= 0.0) return false;  // reads as far, not contact
    return model.alpha / den < kContactDistanceCm;
}

}  // namespace caprox
