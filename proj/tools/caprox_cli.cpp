#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "caprox/config.hpp"
#include "caprox/errors.hpp"

namespace fs = std::filesystem;
using namespace caprox;

namespace {

struct ControllerFlags {
    double kp = 0, kd = 0, d_desired = 0, x_step = 0, control_rate = 0, force_limit = 0,
           z_rate_limit = 0;
    CLI::Option *o_kp = nullptr, *o_kd = nullptr, *o_dd = nullptr, *o_xs = nullptr,
                *o_cr = nullptr, *o_fl = nullptr, *o_zl = nullptr;

    void attach(CLI::App& app) {
        o_kp = app.add_option("--kp", kp, "proportional gain (1/s)");
        o_kd = app.add_option("--kd", kd, "derivative gain");
        o_dd = app.add_option("--d-desired", d_desired, "distance setpoint (cm)");
        o_xs = app.add_option("--x-step", x_step, "advance per control step (cm)");
        o_cr = app.add_option("--control-rate", control_rate, "control rate (Hz)");
        o_fl = app.add_option("--force-limit", force_limit, "halt threshold (N)");
        o_zl = app.add_option("--z-rate-limit", z_rate_limit, "vertical speed clamp (cm/s)");
    }
    void apply(ControllerConfig& c) const {
        if (*o_kp) c.kp = kp;
        if (*o_kd) c.kd = kd;
        if (*o_dd) c.d_desired = d_desired;
        if (*o_xs) c.x_step = x_step;
        if (*o_cr) c.control_rate = control_rate;
        if (*o_fl) c.force_limit = force_limit;
        if (*o_zl) c.z_rate_limit = z_rate_limit;
    }
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void print_model(const CalibrationModel& m) {
    std::printf("model: alpha=%.4f beta=%.4f r_squared=%.4f n_samples=%ld\n", m.alpha, m.beta,
                m.r_squared, m.n_samples);
}

void print_trial(const TrialLog& log, const SteadyStats& stats,
                 const std::vector<ContactEpisode>& episodes) {
    double peak = 0.0;
    for (double f : log.force) peak = std::max(peak, f);
    std::printf("outcome=%s steps=%zu acquisition_step=%ld band_fraction=%.3f "
                "true_err_mean=%.3f peak_force=%.2f episodes=%zu\n",
                outcome_name(log.outcome), log.size(), stats.acquisition_step,
                stats.band_fraction(), stats.true_err_mean(), peak, episodes.size());
}

// Minimal reader for the matrix's trial_index.csv: id, scenario and outcome
// are all the report needs; metrics are recomputed from the logs.
struct IndexRow {
    std::string trial_id, scenario, outcome;
};

std::vector<IndexRow> load_trial_index(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open trial index: " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("trial_id,block,scenario,", 0) != 0)
        throw IoError("not a trial index (bad header): " + path);
    std::vector<IndexRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 12) throw IoError("short row in " + path);
        rows.push_back({cells[0], cells[2], cells[11]});
    }
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capacitive proximity distance-servoing simulator and calibration toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 1;
    std::string config_path;
    std::string out_dir = "out";
    app.add_option("--seed", seed, "master seed (all randomness derives from it)");
    app.add_option("--config", config_path, "JSON config file merged over defaults");
    app.add_option("--out", out_dir, "output directory");

    std::string profile_flag;
    app.add_option("--material", profile_flag, "material profile name (e.g. gown_on_table)");

    ControllerFlags ctrl_flags;
    ctrl_flags.attach(app);

    auto* cmd_calibrate =
        app.add_subcommand("calibrate", "run a calibration sweep and fit the distance law");
    int cal_locations = -1;
    int cal_subject = -1;
    CLI::Option* o_locations =
        cmd_calibrate->add_option("--locations", cal_locations, "sweep locations along the arm");
    cmd_calibrate->add_option("--subject", cal_subject,
                              "synthesize subject N instead of the configured arm")
        ->check(CLI::NonNegativeNumber);

    auto* cmd_fit = app.add_subcommand("fit", "fit the distance law to an existing sweep CSV");
    std::string fit_input;
    cmd_fit->add_option("input", fit_input, "sweep CSV (t_s,location_x_cm,delta_c,distance_cm,...)")
        ->required();

    auto* cmd_trial = app.add_subcommand("trial", "run one dressing trial and export its log");
    double trial_start = -1.0;
    std::string trial_mode, trial_garment, trial_motion, trial_model_path;
    int trial_subject = -1;
    bool trial_sleeved = false;
    CLI::Option* o_sleeved = cmd_trial->add_flag("--sleeved", trial_sleeved,
                                                 "garment sleeve already over the end effector");
    CLI::Option* o_start =
        cmd_trial->add_option("--start", trial_start, "start offset above the fist (cm)");
    cmd_trial->add_option("--mode", trial_mode, "closed or open")
        ->check(CLI::IsMember({"closed", "open"}));
    cmd_trial->add_option("--garment", trial_garment, "garment name (gown, cardigan, ...)");
    cmd_trial->add_option("--motion", trial_motion,
                          "arm motion kind: static, scripted, or random "
                          "(parameters come from the motion config section)")
        ->check(CLI::IsMember({"static", "scripted", "random"}));
    cmd_trial->add_option("--subject", trial_subject,
                          "synthesize subject N instead of the configured arm")
        ->check(CLI::NonNegativeNumber);
    cmd_trial->add_option("--model", trial_model_path,
                          "calibration model JSON (default: calibrate on the configured arm)");

    auto* cmd_matrix =
        app.add_subcommand("matrix", "run the full evaluation matrix and write logs + summary");
    int mx_subjects = -1, mx_reps = -1;
    bool mx_parallel = false, mx_no_motion = false;
    CLI::Option* o_subjects =
        cmd_matrix->add_option("--subjects", mx_subjects, "number of synthetic subjects");
    CLI::Option* o_reps = cmd_matrix->add_option("--reps", mx_reps, "repetitions per cell");
    CLI::Option* o_parallel = cmd_matrix->add_flag("--parallel", mx_parallel,
                                                   "run trials on all hardware threads");
    cmd_matrix->add_flag("--no-motion", mx_no_motion, "skip the moving-arm block");

    auto* cmd_report =
        app.add_subcommand("report", "recompute summary and contact tables from trial logs");
    std::string report_in;
    cmd_report->add_option("--in", report_in,
                           "directory with trial_index.csv and trials/ (default: --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        AppConfig cfg = config_path.empty() ? AppConfig{} : AppConfig::load(config_path);
        ctrl_flags.apply(cfg.controller);
        if (!profile_flag.empty()) cfg.profile_name = profile_flag;

        if (*cmd_calibrate) {
            if (*o_locations) cfg.calibration.n_locations = cal_locations;
            cfg.validate();
            const MaterialProfile& profile = cfg.resolve_profile();
            ArmModel arm = cfg.arm;
            if (cal_subject >= 0) {
                Rng subject_rng(
                    derive_seed(seed, {1, static_cast<std::uint64_t>(cal_subject)}));
                arm = make_subject(cal_subject, subject_rng);
            }
            Rng rng(derive_seed(seed, {0}));
            SweepDataset sweep =
                run_calibration_sweep(arm, profile, cfg.sensor, cfg.calibration.n_locations, rng,
                                      cfg.calibration.descent_start, cfg.calibration.descent_speed);
            CalibrationModel model = fit_model(sweep, profile.range_max);
            ensure_dir(out_dir);
            save_sweep_csv(sweep, (fs::path(out_dir) / "sweep.csv").string());
            save_model(model, (fs::path(out_dir) / "model.json").string());
            std::printf("sweep: %zu samples over %d locations (subject %s)\n", sweep.size(),
                        cfg.calibration.n_locations, arm.id.c_str());
            print_model(model);
            std::printf("wrote %s/sweep.csv and %s/model.json\n", out_dir.c_str(),
                        out_dir.c_str());
        } else if (*cmd_fit) {
            cfg.validate();
            SweepDataset sweep = load_sweep_csv(fit_input);
            CalibrationModel model = fit_model(sweep, cfg.resolve_profile().range_max);
            ensure_dir(out_dir);
            save_model(model, (fs::path(out_dir) / "model.json").string());
            std::printf("fit %zu samples from %s\n", sweep.size(), fit_input.c_str());
            print_model(model);
            std::printf("wrote %s/model.json\n", out_dir.c_str());
        } else if (*cmd_trial) {
            if (*o_start) cfg.scenario.start_offset = trial_start;
            if (!trial_mode.empty())
                cfg.scenario.mode =
                    trial_mode == "open" ? ControlMode::open_loop : ControlMode::closed_loop;
            if (!trial_garment.empty()) cfg.garment_name = trial_garment;
            if (*o_sleeved) cfg.scenario.sleeved = trial_sleeved;
            if (!trial_motion.empty())
                cfg.motion.kind = trial_motion == "scripted" ? MotionKind::scripted_tilt
                                  : trial_motion == "random" ? MotionKind::random_tilt
                                                             : MotionKind::static_arm;
            cfg.validate();
            const MaterialProfile& profile = cfg.resolve_profile();
            ArmModel arm = cfg.arm;
            if (trial_subject >= 0) {
                Rng subject_rng(
                    derive_seed(seed, {1, static_cast<std::uint64_t>(trial_subject)}));
                arm = make_subject(trial_subject, subject_rng);
            }
            CalibrationModel model;
            if (!trial_model_path.empty()) {
                model = load_model(trial_model_path);
            } else {
                Rng cal_rng(derive_seed(seed, {0}));
                SweepDataset sweep = run_calibration_sweep(cfg.arm, profile, cfg.sensor,
                                                           cfg.calibration.n_locations, cal_rng,
                                                           cfg.calibration.descent_start,
                                                           cfg.calibration.descent_speed);
                model = fit_model(sweep, profile.range_max);
            }
            Scenario scenario = cfg.resolve_scenario();
            Rng rng(derive_seed(seed, {4}));
            TrialLog log = run_trial(scenario, arm, model, profile, cfg.sensor, cfg.controller,
                                     cfg.environment, rng);
            ensure_dir(out_dir);
            std::string path = (fs::path(out_dir) / (scenario.name + ".csv")).string();
            export_csv(log, path);
            SteadyStats stats = steady_state_stats(log, cfg.controller.d_desired);
            print_trial(log, stats, report_contacts(log));
            std::printf("wrote %s\n", path.c_str());
        } else if (*cmd_matrix) {
            if (*o_subjects) cfg.matrix.n_subjects = mx_subjects;
            if (*o_reps) cfg.matrix.reps = mx_reps;
            if (*o_parallel) cfg.matrix.parallel = mx_parallel;
            if (mx_no_motion) cfg.matrix.include_motion_block = false;
            cfg.validate();
            MatrixResult result =
                run_matrix(cfg.matrix, cfg.resolve_profile(), cfg.sensor, cfg.controller,
                           cfg.environment, seed, out_dir);
            print_model(result.model);
            std::printf("%-26s %6s %7s %6s %6s %6s %10s %6s %9s\n", "scenario", "trials",
                        "success", "caught", "missed", "halted", "incomplete", "band",
                        "true_err");
            for (const ScenarioAggregate& a : result.summary.scenarios)
                std::printf("%-26s %6ld %7ld %6ld %6ld %6ld %10ld %6.3f %9.3f\n",
                            a.scenario.c_str(), a.trials, a.n_success, a.n_caught, a.n_missed,
                            a.n_halted, a.n_incomplete, a.pooled.band_fraction(),
                            a.pooled.true_err_mean());
            std::printf("%zu trials; logs and summary under %s/\n", result.records.size(),
                        out_dir.c_str());
        } else if (*cmd_report) {
            cfg.validate();
            std::string in_dir = report_in.empty() ? out_dir : report_in;
            std::vector<IndexRow> index =
                load_trial_index((fs::path(in_dir) / "trial_index.csv").string());
            std::vector<TrialRecord> records;
            records.reserve(index.size());
            std::vector<std::pair<std::string, ContactEpisode>> contacts;
            for (const IndexRow& row : index) {
                TrialLog log = load_trial_csv(
                    (fs::path(in_dir) / "trials" / (row.trial_id + ".csv")).string());
                TrialRecord rec;
                rec.trial_id = row.trial_id;
                rec.scenario = row.scenario;
                rec.outcome = outcome_from_name(row.outcome);
                rec.steps = static_cast<long>(log.size());
                rec.steady = steady_state_stats(log, cfg.controller.d_desired);
                for (const ContactEpisode& ep : report_contacts(log)) {
                    ++rec.episodes;
                    rec.episode_max_s = std::max(rec.episode_max_s, ep.duration_s);
                    rec.peak_force_n = std::max(rec.peak_force_n, ep.peak_force_n);
                    contacts.emplace_back(row.trial_id, ep);
                }
                rec.halted = log.any_halt();
                records.push_back(std::move(rec));
            }
            ensure_dir(out_dir);
            save_summary_csv(summarize(records),
                             (fs::path(out_dir) / "summary_report.csv").string());
            std::ofstream cf(fs::path(out_dir) / "contacts.csv");
            if (!cf) throw IoError("cannot open for writing: " + out_dir + "/contacts.csv");
            cf << "trial_id,t_start_s,duration_s,peak_force_n\n";
            char line[256];
            for (const auto& [id, ep] : contacts) {
                std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f\n", id.c_str(), ep.t_start,
                              ep.duration_s, ep.peak_force_n);
                cf << line;
            }
            if (!cf.good()) throw IoError("write failed: " + out_dir + "/contacts.csv");
            std::printf("report over %zu trials: %zu contact episodes; wrote "
                        "%s/summary_report.csv and %s/contacts.csv\n",
                        records.size(), contacts.size(), out_dir.c_str(), out_dir.c_str());
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
