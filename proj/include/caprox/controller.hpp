#pragma once

namespace caprox {

struct ControllerConfig {
    double kp = 0.3;            // per-second proportional gain
    double kd = 0.2;            // dimensionless derivative gain
    double d_desired = 5.0;     // cm setpoint
    double x_step = 0.5;        // cm advanced along the arm per control step
    double control_rate = 10.0; // Hz
    double force_limit = 10.0;  // N, halt threshold (strictly exceeded)
    double z_rate_limit = 5.0;  // cm/s vertical speed clamp

    // Gains admit zero so a deliberately misconfigured trial can run through
    // the same pipeline; everything else must be positive.
    void validate() const;
    double dt() const { return 1.0 / control_rate; }
};

struct ControllerState {
    double prev_error = 0.0;
    bool has_prev_error = false;
    bool halted = false;
    bool misuse_flagged = false;  // a step was requested after the halt
};

// One control step's output. u_z is the commanded vertical velocity before
// integration; e is the error that produced it (both logged per step).
struct Command {
    double dx = 0.0;
    double dz = 0.0;
    double u_z = 0.0;  // cm/s, after the rate clamp
    double e = 0.0;    // cm
};

// PD regulation of the measured distance toward d_desired. u_z = kp*e + kd*de
// is interpreted as a vertical velocity, clamped to +/- z_rate_limit and
// integrated over dt. The first step uses de = 0 (no derivative kick).
// Requesting a step while halted returns (0, 0) and flags misuse.
Command pd_step(ControllerState& state, double d_measured, double dt,
                const ControllerConfig& config);

// Level traversal: (x_step, 0), or (0, 0) once halted.
Command open_loop_step(ControllerState& state, const ControllerConfig& config);

// Latching halt on force strictly exceeding the limit. Returns the halt flag.
bool force_monitor(double force_n, ControllerState& state, const ControllerConfig& config);

}  // namespace caprox
