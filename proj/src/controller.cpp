#include "caprox/controller.hpp"

#include <algorithm>

#include "caprox/errors.hpp"

namespace caprox {

void ControllerConfig::validate() const {
    if (kp < 0.0 || kd < 0.0) throw ConfigError("controller gains must be >= 0");
    if (d_desired <= 0.0) throw ConfigError("d_desired must be > 0");
    if (x_step <= 0.0) throw ConfigError("x_step must be > 0");
    if (control_rate <= 0.0) throw ConfigError("control_rate must be > 0");
    if (force_limit <= 0.0) throw ConfigError("force_limit must be > 0");
    if (z_rate_limit <= 0.0) throw ConfigError("z_rate_limit must be > 0");
}

Command pd_step(ControllerState& state, double d_measured, double dt,
                const ControllerConfig& config) {
    if (dt <= 0.0) throw PreconditionError("pd_step: dt must be > 0");
    if (state.halted) {
        state.misuse_flagged = true;
        return {};
    }
    double e = config.d_desired - d_measured;
    double de = state.has_prev_error ? (e - state.prev_error) / dt : 0.0;
    state.prev_error = e;
    state.has_prev_error = true;
    double u = std::clamp(config.kp * e + config.kd * de, -config.z_rate_limit,
                          config.z_rate_limit);
    return {config.x_step, u * dt, u, e};
}

Command open_loop_step(ControllerState& state, const ControllerConfig& config) {
    if (state.halted) {
        state.misuse_flagged = true;
        return {};
    }
    return {config.x_step, 0.0, 0.0, 0.0};
}

bool force_monitor(double force_n, ControllerState& state, const ControllerConfig& config) {
    if (force_n < 0.0) throw PreconditionError("force_monitor: force must be >= 0");
    if (force_n > config.force_limit) state.halted = true;
    return state.halted;
}

}  // namespace caprox
