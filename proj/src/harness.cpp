#include "caprox/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "caprox/errors.hpp"

namespace fs = std::filesystem;

namespace caprox {
namespace {

double clamp01_x(const ArmModel& arm, double x) { return std::clamp(x, 0.0, arm.length); }

std::string fmt_offset(double v) {
    char buf[32];
    if (std::abs(v - std::round(v)) < 1e-9)
        std::snprintf(buf, sizeof(buf), "%02d", static_cast<int>(std::llround(v)));
    else {
        std::snprintf(buf, sizeof(buf), "%g", v);
        for (char& c : buf)
            if (c == '.') c = 'p';
    }
    return buf;
}

double sample_std(double sum, double sum_sq, long n) {
    if (n < 2) return 0.0;
    double mean = sum / static_cast<double>(n);
    double var = (sum_sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
    return std::sqrt(std::max(0.0, var));
}

}  // namespace

const char* mode_name(ControlMode m) {
    return m == ControlMode::closed_loop ? "closed" : "open";
}

void EnvironmentConfig::validate() const {
    if (stiffness_n_per_cm <= 0.0) throw ConfigError("stiffness_n_per_cm must be > 0");
    if (sensor_overhang_cm < 0.0) throw ConfigError("sensor_overhang_cm must be >= 0");
    if (cloth_thickness_cm < 0.0) throw ConfigError("cloth_thickness_cm must be >= 0");
}

double Scenario::resolved_x_extent(const ArmModel& arm) const {
    return x_extent < 0.0 ? arm.length + 5.0 : x_extent;
}

void Scenario::validate(const ArmModel& arm) const {
    // start_offset 0 is admitted deliberately: the misconfigured-trial check
    // starts on the surface.
    if (start_offset < 0.0) throw ConfigError("scenario '" + name + "': start_offset must be >= 0");
    if (start_margin <= 0.0) throw ConfigError("scenario '" + name + "': start_margin must be > 0");
    if (max_steps < 1) throw ConfigError("scenario '" + name + "': max_steps must be >= 1");
    double extent = resolved_x_extent(arm);
    if (extent > arm.length + start_margin)
        throw ConfigError("scenario '" + name + "': x_extent exceeds arm length + start margin");
    if (extent <= -start_margin)
        throw ConfigError("scenario '" + name + "': x_extent is behind the start position");
    motion.validate();
    garment.validate();
}

TrialLog run_trial(const Scenario& scenario, const ArmModel& arm, const CalibrationModel& model,
                   const MaterialProfile& profile, const SensorConfig& sensor,
                   const ControllerConfig& ctrl, const EnvironmentConfig& env, Rng& rng) {
    arm.validate();
    scenario.validate(arm);
    profile.validate();
    sensor.validate();
    ctrl.validate();
    env.validate();
    if (!model.fitted()) throw PreconditionError("run_trial: calibration model not fitted");

    const double dt = ctrl.dt();
    const double x_end = scenario.resolved_x_extent(arm);
    const auto n_sub =
        std::max<long>(1, std::llround(sensor.sample_rate / ctrl.control_rate));
    const double cloth = scenario.sleeved ? env.cloth_thickness_cm : 0.0;

    TrialLog log;
    log.meta = {scenario.name,    arm.id,          scenario.garment.name,
                mode_name(scenario.mode), arm.length, arm.fist_height, rng.seed()};
    std::size_t reserve_n = static_cast<std::size_t>(std::min<long>(scenario.max_steps, 1024));
    for (auto* col : {&log.t, &log.ee_x, &log.ee_z, &log.true_dist, &log.delta_c, &log.d_est,
                      &log.error, &log.u_z, &log.force, &log.tilt})
        col->reserve(reserve_n);

    double ee_x = -scenario.start_margin;
    double ee_z = arm.fist_height + scenario.start_offset;
    MotionState motion;
    ControllerState state;
    double t = 0.0;

    for (long step = 0; step < scenario.max_steps && ee_x < x_end; ++step) {
        double tilt = step_motion(scenario.motion, motion, t, dt, rng);

        // The electrode's field reaches sensor_overhang_cm ahead of the end
        // effector, so sensing comes alive before x = 0 and reads the nearest
        // on-arm point; farther out the channel reports a saturated far draw.
        double d_fwd;
        if (ee_x >= -env.sensor_overhang_cm) {
            double skin = surface_height(arm, tilt, clamp01_x(arm, ee_x));
            d_fwd = std::max(ee_z - (skin + arm.sensed_surface_offset), 1e-6);
        } else {
            d_fwd = 2.0 * profile.range_max;
        }
        double dc_sum = 0.0;
        for (long j = 0; j < n_sub; ++j)
            dc_sum += forward_delta_c(d_fwd, profile, sensor, rng, t + j / sensor.sample_rate)
                          .delta_c;
        double dc_mean = dc_sum / static_cast<double>(n_sub);
        double d_est = estimate_distance(dc_mean, model, kDistanceFloorCm, profile.range_max);
        bool contact = detect_contact(dc_mean, model);

        Command cmd = scenario.mode == ControlMode::closed_loop ? pd_step(state, d_est, dt, ctrl)
                                                                : open_loop_step(state, ctrl);
        ee_x += cmd.dx;
        ee_z += cmd.dz;

        double skin = surface_height(arm, tilt, clamp01_x(arm, ee_x));
        bool on_arm = ee_x >= 0.0 && ee_x <= arm.length;
        double pen = on_arm ? (skin + cloth) - ee_z : 0.0;
        double force = contact_force(pen, env.stiffness_n_per_cm);
        bool halted = force_monitor(force, state, ctrl);

        log.t.push_back(t);
        log.ee_x.push_back(ee_x);
        log.ee_z.push_back(ee_z);
        log.true_dist.push_back(ee_z - skin);
        log.delta_c.push_back(dc_mean);
        log.d_est.push_back(d_est);
        log.error.push_back(cmd.e);
        log.u_z.push_back(cmd.u_z);
        log.force.push_back(force);
        log.tilt.push_back(tilt);
        log.contact.push_back(contact ? 1 : 0);
        log.halted.push_back(halted ? 1 : 0);

        t += dt;
        if (halted) break;
    }

    log.outcome = classify_outcome(log, arm, scenario.garment);
    return log;
}

Outcome classify_outcome(const TrialLog& log, const ArmModel& arm, const GarmentConfig& garment) {
    if (log.any_halt()) return Outcome::halted;
    double opening_x = garment.sleeve_length_factor * arm.length;
    std::size_t cross = log.size();
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (log.ee_x[i] >= opening_x) {
            cross = i;
            break;
        }
    }
    if (cross == log.size()) return Outcome::incomplete;
    // Height of the end effector above the (tilted) fist line as the sleeve
    // opening passes the hand.
    double offset = log.ee_z[cross] - (arm.fist_height + log.tilt[cross]);
    if (offset > garment.capture_high) return Outcome::missed;
    if (offset < garment.capture_low) return Outcome::caught;
    // Dragging along the forearm also snags the garment.
    double seg_sum = 0.0;
    long seg_n = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (log.ee_x[i] >= 0.0 && log.ee_x[i] <= 0.5 * arm.length) {
            seg_sum += log.true_dist[i];
            ++seg_n;
        }
    }
    if (seg_n > 0 && seg_sum / static_cast<double>(seg_n) < garment.capture_low)
        return Outcome::caught;
    return Outcome::success;
}

std::vector<ContactEpisode> report_contacts(const TrialLog& log) {
    std::vector<ContactEpisode> episodes;
    double dt = log.size() > 1 ? log.t[1] - log.t[0] : 0.1;
    std::size_t i = 0;
    while (i < log.size()) {
        if (!log.contact[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        ContactEpisode ep;
        ep.first_step = static_cast<long>(i);
        ep.t_start = log.t[i];
        while (j < log.size() && log.contact[j]) {
            ep.peak_force_n = std::max(ep.peak_force_n, log.force[j]);
            ++j;
        }
        ep.duration_s = static_cast<double>(j - i) * dt;
        episodes.push_back(ep);
        i = j;
    }
    return episodes;
}

double SteadyStats::band_fraction() const {
    return n_steady > 0 ? static_cast<double>(n_in_band) / static_cast<double>(n_steady) : 0.0;
}
double SteadyStats::est_err_mean() const {
    return n_steady > 0 ? est_err_sum / static_cast<double>(n_steady) : 0.0;
}
double SteadyStats::est_err_std() const { return sample_std(est_err_sum, est_err_sq, n_steady); }
double SteadyStats::true_err_mean() const {
    return n_steady > 0 ? true_err_sum / static_cast<double>(n_steady) : 0.0;
}
double SteadyStats::true_err_std() const {
    return sample_std(true_err_sum, true_err_sq, n_steady);
}

SteadyStats steady_state_stats(const TrialLog& log, double d_desired, double band_lo,
                               double band_hi) {
    SteadyStats s;
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (log.d_est[i] >= band_lo && log.d_est[i] <= band_hi) {
            s.acquisition_step = static_cast<long>(i);
            break;
        }
    }
    if (s.acquisition_step < 0) return s;
    for (std::size_t i = static_cast<std::size_t>(s.acquisition_step); i < log.size(); ++i) {
        double ee = std::abs(log.d_est[i] - d_desired);
        double te = std::abs(log.true_dist[i] - d_desired);
        s.est_err_sum += ee;
        s.est_err_sq += ee * ee;
        s.true_err_sum += te;
        s.true_err_sq += te * te;
        if (log.d_est[i] >= band_lo && log.d_est[i] <= band_hi) ++s.n_in_band;
        ++s.n_steady;
    }
    return s;
}

void MatrixConfig::validate() const {
    if (n_subjects < 1) throw ConfigError("matrix: n_subjects must be >= 1");
    if (reps < 1) throw ConfigError("matrix: reps must be >= 1");
    if (start_offsets.empty()) throw ConfigError("matrix: start_offsets must be non-empty");
    for (double h : start_offsets)
        if (h <= 0.0) throw ConfigError("matrix: start offsets must be > 0");
    if (motion_start_offset <= 0.0) throw ConfigError("matrix: motion_start_offset must be > 0");
    if (max_steps < 1) throw ConfigError("matrix: max_steps must be >= 1");
}

SummaryReport summarize(const std::vector<TrialRecord>& records) {
    SummaryReport report;
    std::unordered_map<std::string, std::size_t> index;
    for (const TrialRecord& rec : records) {
        auto [it, inserted] = index.try_emplace(rec.scenario, report.scenarios.size());
        if (inserted) {
            ScenarioAggregate agg;
            agg.scenario = rec.scenario;
            report.scenarios.push_back(agg);
        }
        ScenarioAggregate& agg = report.scenarios[it->second];
        ++agg.trials;
        switch (rec.outcome) {
            case Outcome::success: ++agg.n_success; break;
            case Outcome::caught: ++agg.n_caught; break;
            case Outcome::missed: ++agg.n_missed; break;
            case Outcome::halted: ++agg.n_halted; break;
            case Outcome::incomplete: ++agg.n_incomplete; break;
        }
        agg.pooled.n_steady += rec.steady.n_steady;
        agg.pooled.n_in_band += rec.steady.n_in_band;
        agg.pooled.est_err_sum += rec.steady.est_err_sum;
        agg.pooled.est_err_sq += rec.steady.est_err_sq;
        agg.pooled.true_err_sum += rec.steady.true_err_sum;
        agg.pooled.true_err_sq += rec.steady.true_err_sq;
        agg.band_fraction_min = std::min(agg.band_fraction_min, rec.steady.band_fraction());
        agg.episodes += rec.episodes;
        agg.episode_max_s = std::max(agg.episode_max_s, rec.episode_max_s);
        agg.episode_peak_n = std::max(agg.episode_peak_n, rec.peak_force_n);
    }
    return report;
}

namespace {

struct PlannedTrial {
    Scenario scenario;
    TrialRecord record;  // identity fields filled; metrics filled after the run
    int arm_index = 0;
};

TrialRecord execute_trial(const PlannedTrial& p, const std::vector<ArmModel>& arms,
                          const CalibrationModel& model, const MaterialProfile& profile,
                          const SensorConfig& sensor, const ControllerConfig& ctrl,
                          const EnvironmentConfig& env, TrialLog* keep_log) {
    Rng rng(p.record.seed);
    TrialLog log = run_trial(p.scenario, arms[static_cast<std::size_t>(p.arm_index)], model,
                             profile, sensor, ctrl, env, rng);
    TrialRecord rec = p.record;
    rec.outcome = log.outcome;
    rec.steps = static_cast<long>(log.size());
    rec.steady = steady_state_stats(log, ctrl.d_desired);
    for (const ContactEpisode& ep : report_contacts(log)) {
        ++rec.episodes;
        rec.episode_max_s = std::max(rec.episode_max_s, ep.duration_s);
    }
    for (double f : log.force) rec.peak_force_n = std::max(rec.peak_force_n, f);
    rec.halted = log.any_halt();
    if (keep_log) *keep_log = std::move(log);
    return rec;
}

}  // namespace

MatrixResult run_matrix(const MatrixConfig& matrix, const MaterialProfile& profile,
                        const SensorConfig& sensor, const ControllerConfig& ctrl,
                        const EnvironmentConfig& env, std::uint64_t master_seed,
                        const std::string& out_dir) {
    matrix.validate();
    profile.validate();
    sensor.validate();
    ctrl.validate();
    env.validate();

    // One calibration run on the reference arm serves every trial, mirroring
    // a single per-session calibration rather than per-subject refits.
    Rng cal_rng(derive_seed(master_seed, {0}));
    ArmModel reference;
    SweepDataset sweep = run_calibration_sweep(reference, profile, sensor, 6, cal_rng);
    CalibrationModel model = fit_model(sweep, profile.range_max);

    std::vector<ArmModel> arms;
    arms.reserve(static_cast<std::size_t>(matrix.n_subjects));
    for (int i = 0; i < matrix.n_subjects; ++i) {
        Rng subject_rng(derive_seed(master_seed, {1, static_cast<std::uint64_t>(i)}));
        arms.push_back(make_subject(i, subject_rng));
    }

    std::vector<PlannedTrial> plan;
    for (int s = 0; s < matrix.n_subjects; ++s) {
        for (std::size_t hi = 0; hi < matrix.start_offsets.size(); ++hi) {
            for (int mi = 0; mi < 2; ++mi) {
                for (int rep = 0; rep < matrix.reps; ++rep) {
                    PlannedTrial p;
                    p.arm_index = s;
                    p.scenario.start_offset = matrix.start_offsets[hi];
                    p.scenario.mode = mi == 0 ? ControlMode::closed_loop : ControlMode::open_loop;
                    p.scenario.max_steps = matrix.max_steps;
                    p.scenario.name = "pose_h" + fmt_offset(matrix.start_offsets[hi]) + "_" +
                                      mode_name(p.scenario.mode);
                    p.record.block = "pose";
                    p.record.scenario = p.scenario.name;
                    p.record.subject = s;
                    p.record.subject_id = arms[static_cast<std::size_t>(s)].id;
                    p.record.rep = rep;
                    p.record.start_offset = matrix.start_offsets[hi];
                    p.record.mode = p.scenario.mode;
                    p.record.garment = p.scenario.garment.name;
                    p.record.sleeved = false;
                    p.record.seed = derive_seed(
                        master_seed, {2, static_cast<std::uint64_t>(s), hi,
                                      static_cast<std::uint64_t>(mi),
                                      static_cast<std::uint64_t>(rep)});
                    p.record.trial_id = p.scenario.name + "_" +
                                        arms[static_cast<std::size_t>(s)].id + "_r" +
                                        std::to_string(rep);
                    plan.push_back(std::move(p));
                }
            }
        }
    }
    if (matrix.include_motion_block) {
        struct Variant {
            const char* label;
            GarmentConfig garment;
            bool sleeved;
        };
        const Variant variants[] = {
            {"motion_gown_bare", GarmentConfig::gown(), false},
            {"motion_gown_sleeved", GarmentConfig::gown(), true},
            {"motion_cardigan_sleeved", GarmentConfig::cardigan(), true},
        };
        for (int s = 0; s < matrix.n_subjects; ++s) {
            for (std::size_t v = 0; v < 3; ++v) {
                for (int rep = 0; rep < matrix.reps; ++rep) {
                    PlannedTrial p;
                    p.arm_index = s;
                    p.scenario.start_offset = matrix.motion_start_offset;
                    p.scenario.mode = ControlMode::closed_loop;
                    p.scenario.motion = MotionProfile::random(20.0, 0);
                    p.scenario.garment = variants[v].garment;
                    p.scenario.sleeved = variants[v].sleeved;
                    p.scenario.max_steps = matrix.max_steps;
                    p.scenario.name = variants[v].label;
                    p.record.block = "motion";
                    p.record.scenario = p.scenario.name;
                    p.record.subject = s;
                    p.record.subject_id = arms[static_cast<std::size_t>(s)].id;
                    p.record.rep = rep;
                    p.record.start_offset = matrix.motion_start_offset;
                    p.record.mode = ControlMode::closed_loop;
                    p.record.garment = variants[v].garment.name;
                    p.record.sleeved = variants[v].sleeved;
                    p.record.seed =
                        derive_seed(master_seed, {3, static_cast<std::uint64_t>(s), v,
                                                  static_cast<std::uint64_t>(rep)});
                    p.record.trial_id = p.scenario.name + "_" +
                                        arms[static_cast<std::size_t>(s)].id + "_r" +
                                        std::to_string(rep);
                    plan.push_back(std::move(p));
                }
            }
        }
    }

    std::vector<TrialRecord> records(plan.size());
    std::vector<TrialLog> logs;
    TrialLog* log_slot = nullptr;
    if (!out_dir.empty()) logs.resize(plan.size());

    if (matrix.parallel && plan.size() > 1) {
        unsigned n_workers = std::max(1u, std::thread::hardware_concurrency());
        n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(plan.size()));
        std::vector<std::future<void>> futures;
        futures.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < plan.size(); i += n_workers)
                    records[i] = execute_trial(plan[i], arms, model, profile, sensor, ctrl, env,
                                               logs.empty() ? nullptr : &logs[i]);
            }));
        }
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t i = 0; i < plan.size(); ++i) {
            log_slot = logs.empty() ? nullptr : &logs[i];
            records[i] = execute_trial(plan[i], arms, model, profile, sensor, ctrl, env, log_slot);
        }
    }

    MatrixResult result;
    result.model = model;
    result.records = std::move(records);
    result.summary = summarize(result.records);

    if (!out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(fs::path(out_dir) / "trials", ec);
        if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
        for (std::size_t i = 0; i < plan.size(); ++i)
            export_csv(logs[i],
                       (fs::path(out_dir) / "trials" / (result.records[i].trial_id + ".csv"))
                           .string());
        save_trial_index_csv(result.records, (fs::path(out_dir) / "trial_index.csv").string());
        save_summary_csv(result.summary, (fs::path(out_dir) / "summary.csv").string());
        save_model(model, (fs::path(out_dir) / "model.json").string());
    }
    return result;
}

void export_csv(const TrialLog& log, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "t_s,ee_x_cm,ee_z_cm,true_dist_cm,delta_c,d_est_cm,error_cm,u_z_cm_s,force_n,contact,"
         "halted\n";
    char line[256];
    for (std::size_t i = 0; i < log.size(); ++i) {
        std::snprintf(line, sizeof(line),
                      "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d\n", log.t[i],
                      log.ee_x[i], log.ee_z[i], log.true_dist[i], log.delta_c[i], log.d_est[i],
                      log.error[i], log.u_z[i], log.force[i], log.contact[i] ? 1 : 0,
                      log.halted[i] ? 1 : 0);
        f << line;
    }
    if (!f.good()) throw IoError("write failed: " + path);
}

TrialLog load_trial_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("t_s,ee_x_cm,ee_z_cm,true_dist_cm", 0) != 0)
        throw IoError("not a trial CSV (bad header): " + path);
    TrialLog log;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        double vals[11];
        for (double& v : vals) {
            if (!std::getline(ss, cell, ',')) throw IoError("short row in " + path);
            v = std::stod(cell);
        }
        log.t.push_back(vals[0]);
        log.ee_x.push_back(vals[1]);
        log.ee_z.push_back(vals[2]);
        log.true_dist.push_back(vals[3]);
        log.delta_c.push_back(vals[4]);
        log.d_est.push_back(vals[5]);
        log.error.push_back(vals[6]);
        log.u_z.push_back(vals[7]);
        log.force.push_back(vals[8]);
        log.contact.push_back(vals[9] != 0.0 ? 1 : 0);
        log.halted.push_back(vals[10] != 0.0 ? 1 : 0);
        log.tilt.push_back(0.0);
    }
    return log;
}

void save_summary_csv(const SummaryReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "scenario,trials,success,caught,missed,halted,incomplete,steady_samples,"
         "band_fraction,band_fraction_min,est_err_mean_cm,est_err_std_cm,true_err_mean_cm,"
         "true_err_std_cm,episodes,episode_max_s,episode_peak_n\n";
    char line[512];
    for (const ScenarioAggregate& a : report.scenarios) {
        std::snprintf(line, sizeof(line),
                      "%s,%ld,%ld,%ld,%ld,%ld,%ld,%ld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%ld,%.6f,"
                      "%.6f\n",
                      a.scenario.c_str(), a.trials, a.n_success, a.n_caught, a.n_missed,
                      a.n_halted, a.n_incomplete, a.pooled.n_steady, a.pooled.band_fraction(),
                      a.band_fraction_min, a.pooled.est_err_mean(), a.pooled.est_err_std(),
                      a.pooled.true_err_mean(), a.pooled.true_err_std(), a.episodes,
                      a.episode_max_s, a.episode_peak_n);
        f << line;
    }
    if (!f.good()) throw IoError("write failed: " + path);
}

void save_trial_index_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "trial_id,block,scenario,subject,subject_id,rep,start_offset_cm,mode,garment,sleeved,"
         "seed,outcome,steps,acquisition_step,band_fraction,est_err_mean_cm,true_err_mean_cm,"
         "episodes,episode_max_s,peak_force_n,halted\n";
    char line[512];
    for (const TrialRecord& r : records) {
        std::snprintf(line, sizeof(line),
                      "%s,%s,%s,%d,%s,%d,%.6f,%s,%s,%d,%llu,%s,%ld,%ld,%.6f,%.6f,%.6f,%ld,%.6f,"
                      "%.6f,%d\n",
                      r.trial_id.c_str(), r.block.c_str(), r.scenario.c_str(), r.subject,
                      r.subject_id.c_str(), r.rep, r.start_offset, mode_name(r.mode),
                      r.garment.c_str(), r.sleeved ? 1 : 0,
                      static_cast<unsigned long long>(r.seed), outcome_name(r.outcome), r.steps,
                      r.steady.acquisition_step, r.steady.band_fraction(),
                      r.steady.est_err_mean(), r.steady.true_err_mean(), r.episodes,
                      r.episode_max_s, r.peak_force_n, r.halted ? 1 : 0);
        f << line;
    }
    if (!f.good()) throw IoError("write failed: " + path);
}

}  // namespace caprox
