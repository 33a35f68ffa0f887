#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caprox/calibration.hpp"
#include "caprox/controller.hpp"
#include "caprox/environment.hpp"
#include "caprox/random.hpp"
#include "caprox/sensor_model.hpp"

namespace caprox {

enum class ControlMode { closed_loop, open_loop };
const char* mode_name(ControlMode m);

// World parameters that are not part of any single component: the contact
// spring, the sensing overhang (how far the electrode's fringing field reaches
// ahead of the end effector along x), and garment cloth thickness.
struct EnvironmentConfig {
    double stiffness_n_per_cm = kDefaultStiffnessNPerCm;
    double sensor_overhang_cm = 15.0;  // 11.5 cm electrode plus fringing margin
    double cloth_thickness_cm = kClothThicknessCm;
    void validate() const;
};

struct Scenario {
    std::string name = "trial";
    double start_offset = 10.0;  // cm above the fist top at the start
    ControlMode mode = ControlMode::closed_loop;
    MotionProfile motion = MotionProfile::static_arm();
    GarmentConfig garment = GarmentConfig::gown();
    bool sleeved = false;        // garment already pulled over the end effector
    double start_margin = 20.0;  // approach runway: the trial starts at x = -margin
    double x_extent = -1.0;      // terminal x; negative means arm length + 5 cm
    long max_steps = 4000;

    double resolved_x_extent(const ArmModel& arm) const;
    void validate(const ArmModel& arm) const;
};

struct ContactEpisode {
    long first_step = 0;
    double t_start = 0.0;
    double duration_s = 0.0;
    double peak_force_n = 0.0;
};

struct TrialMeta {
    std::string scenario;
    std::string subject;
    std::string garment;
    std::string mode;
    double arm_length = 0.0;
    double fist_height = 0.0;
    std::uint64_t seed = 0;
};

// Column-wise per-step record. Each row holds the end-of-period pose together
// with the measurement and command that produced it; t is the period start.
struct TrialLog {
    std::vector<double> t, ee_x, ee_z, true_dist, delta_c, d_est, error, u_z, force, tilt;
    std::vector<std::uint8_t> contact, halted;
    Outcome outcome = Outcome::incomplete;
    TrialMeta meta;

    std::size_t size() const { return t.size(); }
    bool any_halt() const { return !halted.empty() && halted.back() != 0; }
};

// Steps the world at the control rate: advance arm motion, sample the sensor
// (period mean), estimate distance, controller step, move, contact force,
// safety monitor, log. Ends at the x extent, on halt, or on the step budget.
TrialLog run_trial(const Scenario& scenario, const ArmModel& arm, const CalibrationModel& model,
                   const MaterialProfile& profile, const SensorConfig& sensor,
                   const ControllerConfig& ctrl, const EnvironmentConfig& env, Rng& rng);

// halted > missed/caught (judged where the sleeve opening crosses the arm)
// > caught-by-drag (mean true gap over the forearm below the low band)
// > success; a log that never reaches the sleeve opening is incomplete.
Outcome classify_outcome(const TrialLog& log, const ArmModel& arm, const GarmentConfig& garment);

std::vector<ContactEpisode> report_contacts(const TrialLog& log);

// Statistics over the steady-state window: from the first step whose estimate
// enters [band_lo, band_hi] to the end of the log.
struct SteadyStats {
    long acquisition_step = -1;  // -1: estimate never entered the band
    long n_steady = 0;
    long n_in_band = 0;
    double est_err_sum = 0.0, est_err_sq = 0.0;    // |d_est - d_desired|
    double true_err_sum = 0.0, true_err_sq = 0.0;  // |true_dist - d_desired|

    double band_fraction() const;
    double est_err_mean() const;
    double est_err_std() const;
    double true_err_mean() const;
    double true_err_std() const;
};

SteadyStats steady_state_stats(const TrialLog& log, double d_desired, double band_lo = 4.0,
                               double band_hi = 6.0);

// One row of the evaluation matrix, with the per-trial metrics the summary
// (and the acceptance checks) are built from.
struct TrialRecord {
    std::string trial_id;
    std::string block;  // "pose" or "motion"
    std::string scenario;
    int subject = 0;
    std::string subject_id;
    int rep = 0;
    double start_offset = 0.0;
    ControlMode mode = ControlMode::closed_loop;
    std::string garment;
    bool sleeved = false;
    std::uint64_t seed = 0;
    Outcome outcome = Outcome::incomplete;
    long steps = 0;
    SteadyStats steady;
    long episodes = 0;
    double episode_max_s = 0.0;
    double peak_force_n = 0.0;
    bool halted = false;
};

struct ScenarioAggregate {
    std::string scenario;
    long trials = 0;
    long n_success = 0, n_caught = 0, n_missed = 0, n_halted = 0, n_incomplete = 0;
    SteadyStats pooled;              // sums over all steady samples in the scenario
    double band_fraction_min = 1.0;  // worst single trial
    long episodes = 0;
    double episode_max_s = 0.0;
    double episode_peak_n = 0.0;
};

struct SummaryReport {
    std::vector<ScenarioAggregate> scenarios;  // in first-seen plan order
};

struct MatrixConfig {
    int n_subjects = 10;
    int reps = 5;
    std::vector<double> start_offsets = {5.0, 10.0, 15.0, 20.0};
    bool include_motion_block = true;
    double motion_start_offset = 5.0;
    bool parallel = false;
    long max_steps = 4000;
    void validate() const;
};

struct MatrixResult {
    CalibrationModel model;
    std::vector<TrialRecord> records;
    SummaryReport summary;
};

// Fits one calibration model on the default arm, synthesizes the subjects,
// and runs the pose block (subjects x start offsets x {closed, open} x reps,
// gown, static arm) plus the motion block (subjects x {gown bare, gown
// sleeved, cardigan sleeved} x reps, random tilt). Per-trial seeds derive
// from the master seed, so the result is independent of execution order and
// `parallel` only changes wall time. With a non-empty out_dir, writes one log
// CSV per trial plus trial_index.csv, summary.csv, and model.json.
MatrixResult run_matrix(const MatrixConfig& matrix, const MaterialProfile& profile,
                        const SensorConfig& sensor, const ControllerConfig& ctrl,
                        const EnvironmentConfig& env, std::uint64_t master_seed,
                        const std::string& out_dir = "");

SummaryReport summarize(const std::vector<TrialRecord>& records);

void export_csv(const TrialLog& log, const std::string& path);
TrialLog load_trial_csv(const std::string& path);  // tilt and meta are not in the CSV

void save_summary_csv(const SummaryReport& report, const std::string& path);
void save_trial_index_csv(const std::vector<TrialRecord>& records, const std::string& path);

}  // namespace caprox
