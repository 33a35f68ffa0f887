// Acceptance gate: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "caprox/config.hpp"
#include "caprox/errors.hpp"

namespace fs = std::filesystem;
using namespace caprox;
using clock_t_ = std::chrono::steady_clock;

namespace {

int failures = 0;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

void report(int idx, const char* name, bool pass, const std::string& detail) {
    std::printf("[%d] %-26s %s  %s\n", idx, name, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(clock_t_::time_point t0) {
    return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

double max_force(const TrialLog& log) {
    double peak = 0.0;
    for (double f : log.force) peak = std::max(peak, f);
    return peak;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const ScenarioAggregate* find_scenario(const SummaryReport& s, const std::string& name) {
    for (const ScenarioAggregate& a : s.scenarios)
        if (a.scenario == name) return &a;
    return nullptr;
}

}  // namespace

int main() {
    constexpr std::uint64_t kSeed = 1;
    const MaterialProfile arm_profile = human_arm_profile();
    const SensorConfig sensor;
    const ControllerConfig ctrl;
    const EnvironmentConfig env;
    const ArmModel reference;

    std::printf("running default evaluation matrix (seed %llu)...\n",
                static_cast<unsigned long long>(kSeed));
    auto t_matrix = clock_t_::now();
    MatrixResult matrix = run_matrix(MatrixConfig{}, arm_profile, sensor, ctrl, env, kSeed);
    double matrix_s = seconds_since(t_matrix);

    // 1. Calibration recovery: noiseless parameter recovery, noisy R^2, runtime.
    {
        auto t0 = clock_t_::now();
        MaterialProfile quiet = arm_profile;
        quiet.noise_sigma = 0.0;
        Rng rng0(derive_seed(kSeed, {30}));
        SweepDataset clean = run_calibration_sweep(reference, quiet, sensor, 6, rng0);
        CalibrationModel m0 = fit_model(clean, quiet.range_max);
        double ra = rel_err(m0.alpha, 84.38);
        double rb = rel_err(m0.beta, 4.681);
        double r2_lo = 1.0, r2_hi = 0.0;
        for (int k = 0; k < 20; ++k) {
            Rng rng(derive_seed(kSeed, {31, static_cast<std::uint64_t>(k)}));
            SweepDataset sweep = run_calibration_sweep(reference, arm_profile, sensor, 6, rng);
            double r2 = fit_model(sweep, arm_profile.range_max).r_squared;
            r2_lo = std::min(r2_lo, r2);
            r2_hi = std::max(r2_hi, r2);
        }
        double elapsed = seconds_since(t0);
        bool pass = ra < 1e-4 && rb < 1e-4 && r2_lo >= 0.969 - 0.02 && r2_hi <= 0.969 + 0.02 &&
                    elapsed < 5.0;
        report(1, "calibration recovery", pass,
               fmt("alpha rel %.2e, beta rel %.2e, R2 in [%.4f, %.4f] over 20 seeds, %.2f s",
                   ra, rb, r2_lo, r2_hi, elapsed));
    }

    // 2. Cross-subject generalization: subject-0 model on the pooled sweep,
    //    and inter-subject true-distance spread at matched delta-C.
    {
        std::vector<SweepDataset> sweeps;
        std::vector<ArmModel> arms;
        for (int s = 0; s < 10; ++s) {
            Rng subject_rng(derive_seed(kSeed, {1, static_cast<std::uint64_t>(s)}));
            arms.push_back(make_subject(s, subject_rng));
            Rng rng(derive_seed(kSeed, {20, static_cast<std::uint64_t>(s)}));
            sweeps.push_back(
                run_calibration_sweep(arms.back(), arm_profile, sensor, 6, rng));
        }
        CalibrationModel m0 = fit_model(sweeps[0], arm_profile.range_max);
        SweepDataset pooled;
        for (const SweepDataset& s : sweeps) pooled.append(s);
        double pooled_r2 = evaluate_fit(m0, pooled, arm_profile.range_max).r_squared;

        // Bin edges in delta-C: the noiseless curve at d = 1..9 cm.
        std::vector<double> edges;
        for (int d = 1; d <= 9; ++d)
            edges.push_back(arm_profile.alpha_true / d - arm_profile.beta_true);
        double max_spread = 0.0;
        int bins_used = 0;
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            double lo = edges[b + 1], hi = edges[b];  // edges fall with distance
            std::vector<double> means;
            bool complete = true;
            for (const SweepDataset& sw : sweeps) {
                double sum = 0.0;
                long n = 0;
                for (std::size_t i = 0; i < sw.size(); ++i) {
                    if (sw.distance[i] > arm_profile.range_max) continue;
                    if (sw.delta_c[i] >= lo && sw.delta_c[i] < hi) {
                        sum += sw.distance[i];
                        ++n;
                    }
                }
                if (n < 30) {
                    complete = false;
                    break;
                }
                means.push_back(sum / static_cast<double>(n));
            }
            if (!complete) continue;
            double mean = 0.0;
            for (double m : means) mean += m;
            mean /= static_cast<double>(means.size());
            double var = 0.0;
            for (double m : means) var += (m - mean) * (m - mean);
            double spread = std::sqrt(var / static_cast<double>(means.size() - 1));
            max_spread = std::max(max_spread, spread);
            ++bins_used;
        }
        bool pass = pooled_r2 >= 0.95 && bins_used >= 6 && max_spread <= 0.2;
        report(2, "cross-subject fit", pass,
               fmt("pooled R2 %.4f (need >= 0.95), matched-dC spread max %.3f cm over %d bins",
                   pooled_r2, max_spread, bins_used));
    }

    // 3. Contact threshold: flips between delta-C = 164 and 165 with the
    //    paper constants, exact.
    {
        CalibrationModel paper{84.38, 4.681, 0.969, 0};
        bool at164 = detect_contact(164.0, paper);
        bool at165 = detect_contact(165.0, paper);
        bool pass = !at164 && at165;
        report(3, "contact threshold", pass,
               fmt("detect_contact(164)=%d detect_contact(165)=%d", at164 ? 1 : 0,
                   at165 ? 1 : 0));
    }

    // 4. Pose-error adaptation over the pose block (every subject x seed).
    {
        long closed_n = 0, closed_bad = 0, lo_n = 0, lo_bad = 0, hi_n = 0, hi_bad = 0;
        double min_bf = 1.0;
        for (const TrialRecord& r : matrix.records) {
            if (r.block != "pose") continue;
            if (r.mode == ControlMode::closed_loop) {
                ++closed_n;
                double bf = r.steady.band_fraction();
                min_bf = std::min(min_bf, bf);
                if (r.outcome != Outcome::success || r.steady.acquisition_step < 0 || bf < 0.75)
                    ++closed_bad;
            } else if (r.start_offset <= 10.0) {
                ++lo_n;
                if (r.outcome != Outcome::success) ++lo_bad;
            } else {
                ++hi_n;
                if (r.outcome != Outcome::missed && r.outcome != Outcome::caught) ++hi_bad;
            }
        }
        bool pass = closed_n == 200 && lo_n == 100 && hi_n == 100 && closed_bad == 0 &&
                    lo_bad == 0 && hi_bad == 0;
        report(4, "pose-error adaptation", pass,
               fmt("closed %ld/%ld ok (min band fraction %.3f), open low %ld/%ld success, "
                   "open high %ld/%ld missed/caught",
                   closed_n - closed_bad, closed_n, min_bf, lo_n - lo_bad, lo_n, hi_n - hi_bad,
                   hi_n));
    }

    // 5. Motion tracking: random-tilt trials, sleeved vs bare.
    {
        double err_sum = 0.0;
        long err_n = 0;
        long no_acquire = 0;
        for (const TrialRecord& r : matrix.records) {
            if (r.block != "motion") continue;
            if (r.steady.acquisition_step < 0) ++no_acquire;
            err_sum += r.steady.true_err_sum;
            err_n += r.steady.n_steady;
        }
        double mean_err = err_n > 0 ? err_sum / static_cast<double>(err_n) : 1e9;
        const ScenarioAggregate* bare = find_scenario(matrix.summary, "motion_gown_bare");
        const ScenarioAggregate* sleeved = find_scenario(matrix.summary, "motion_gown_sleeved");
        double delta = bare && sleeved
                           ? std::abs(bare->pooled.true_err_mean() - sleeved->pooled.true_err_mean())
                           : 1e9;
        bool pass = mean_err <= 2.0 && delta <= 0.3 && no_acquire == 0;
        report(5, "motion tracking", pass,
               fmt("mean tracking error %.3f cm (gate 2.0, target ~1.5), sleeved-bare delta "
                   "%.3f cm",
                   mean_err, delta));
    }

    // 6. Safety: episode bounds over the whole matrix, no halts, and the
    //    misconfigured trial trips the latch.
    {
        double worst_ep = 0.0, worst_force = 0.0;
        long halts = 0;
        for (const TrialRecord& r : matrix.records) {
            worst_ep = std::max(worst_ep, r.episode_max_s);
            worst_force = std::max(worst_force, r.peak_force_n);
            if (r.halted) ++halts;
        }
        ControllerConfig misconfig = ctrl;
        misconfig.kp = 0.0;
        misconfig.kd = 0.0;
        Scenario sc;
        sc.name = "misconfig";
        sc.start_offset = 0.0;
        Rng rng(derive_seed(kSeed, {4}));
        TrialLog mlog =
            run_trial(sc, reference, matrix.model, arm_profile, sensor, misconfig, env, rng);
        bool tripped = mlog.outcome == Outcome::halted && mlog.any_halt() &&
                       max_force(mlog) > 10.0;
        ControllerState latch;
        force_monitor(10.01, latch, misconfig);
        Command after = pd_step(latch, 3.0, 0.1, misconfig);
        bool latched = latch.halted && latch.misuse_flagged && after.dx == 0.0 &&
                       after.dz == 0.0 && force_monitor(0.0, latch, misconfig);
        bool pass = worst_force < 5.0 && worst_ep <= 0.5 && halts == 0 && tripped && latched;
        report(6, "safety", pass,
               fmt("matrix peak force %.2f N, longest episode %.1f s, halts %ld; misconfig "
                   "tripped=%d (%.1f N) latched=%d",
                   worst_force, worst_ep, halts, tripped ? 1 : 0, max_force(mlog),
                   latched ? 1 : 0));
    }

    // 7. Property suites: estimator monotonicity + round-trip, PD algebra,
    //    motion bounds over 100 seeds, bit-identical reruns, runtime budget.
    {
        CalibrationModel truth{arm_profile.alpha_true, arm_profile.beta_true, 1.0, 0};
        bool monotone = true;
        double prev = 1e18;
        for (double dc = 0.0; dc <= 400.0; dc += 0.25) {
            double est = estimate_distance(dc, truth);
            if (est > prev + 1e-15) monotone = false;
            prev = est;
        }
        MaterialProfile quiet = arm_profile;
        quiet.noise_sigma = 0.0;
        Rng quiet_rng(1);
        double worst_rt = 0.0;
        for (double d = 0.5; d <= 10.0 + 1e-9; d += 0.01) {
            double dc = forward_delta_c(d, quiet, sensor, quiet_rng).delta_c;
            worst_rt = std::max(worst_rt, std::abs(estimate_distance(dc, truth) - d));
        }

        ControllerState eq;
        Command c1 = pd_step(eq, ctrl.d_desired, 0.1, ctrl);
        Command c2 = pd_step(eq, ctrl.d_desired, 0.1, ctrl);
        bool pd_ok = c1.dz == 0.0 && c2.dz == 0.0;
        ControllerState s1;
        Command cd = pd_step(s1, 3.0, 0.1, ctrl);  // e=+2, de=0 on the first step
        pd_ok = pd_ok && std::abs(cd.u_z - 0.6) < 1e-12 && cd.dz > 0.0;
        ControllerState s2;
        pd_step(s2, 3.0, 0.1, ctrl);
        Command cd2 = pd_step(s2, 3.0, 0.1, ctrl);  // still e=+2, de=0
        pd_ok = pd_ok && std::abs(cd2.u_z - 0.6) < 1e-12;
        // linearity: u(a*e) = a*u(e) with zero prev error, below the clamp
        ControllerState s3a, s3b;
        Command ca = pd_step(s3a, ctrl.d_desired - 1.0, 0.1, ctrl);
        Command cb = pd_step(s3b, ctrl.d_desired - 2.0, 0.1, ctrl);
        pd_ok = pd_ok && std::abs(cb.u_z - 2.0 * ca.u_z) < 1e-12;

        bool motion_ok = true;
        MotionProfile rt = MotionProfile::random();
        for (int s = 0; s < 100 && motion_ok; ++s) {
            Rng rng(derive_seed(kSeed, {40, static_cast<std::uint64_t>(s)}));
            MotionState ms;
            double t = 0.0, prev_tilt = 0.0;
            for (int k = 0; k < 1200; ++k) {
                double tilt = step_motion(rt, ms, t, 0.1, rng);
                if (std::abs(tilt) > rt.amplitude + 1e-12 ||
                    std::abs(tilt - prev_tilt) > rt.rate_limit * 0.1 + 1e-12) {
                    motion_ok = false;
                    break;
                }
                prev_tilt = tilt;
                t += 0.1;
            }
        }

        MatrixConfig small;
        small.n_subjects = 2;
        small.reps = 2;
        small.start_offsets = {5.0, 20.0};
        fs::path dir_a = fs::temp_directory_path() / "caprox_accept_a";
        fs::path dir_b = fs::temp_directory_path() / "caprox_accept_b";
        fs::remove_all(dir_a);
        fs::remove_all(dir_b);
        run_matrix(small, arm_profile, sensor, ctrl, env, kSeed, dir_a.string());
        run_matrix(small, arm_profile, sensor, ctrl, env, kSeed, dir_b.string());
        bool identical = slurp(dir_a / "summary.csv") == slurp(dir_b / "summary.csv") &&
                         slurp(dir_a / "trial_index.csv") == slurp(dir_b / "trial_index.csv") &&
                         !slurp(dir_a / "summary.csv").empty();
        fs::remove_all(dir_a);
        fs::remove_all(dir_b);

        bool pass = monotone && worst_rt < 1e-9 && pd_ok && motion_ok && identical &&
                    matrix_s < 60.0;
        report(7, "property suites", pass,
               fmt("monotone=%d round-trip %.1e cm, pd=%d, motion bounds 100 seeds=%d, "
                   "rerun identical=%d, matrix %.1f s",
                   monotone ? 1 : 0, worst_rt, pd_ok ? 1 : 0, motion_ok ? 1 : 0,
                   identical ? 1 : 0, matrix_s));
    }

    // 8. Material discrimination: arm vs gown-on-table below 10 cm.
    {
        Rng rng_a(derive_seed(kSeed, {50}));
        Rng rng_g(derive_seed(kSeed, {51}));
        SweepDataset arm_sweep = run_calibration_sweep(reference, arm_profile, sensor, 6, rng_a);
        SweepDataset gown_sweep =
            run_calibration_sweep(reference, gown_on_table_profile(), sensor, 6, rng_g);
        SeparationReport sep = discriminate_material(arm_sweep, gown_sweep);
        int loaded = 0, separated = 0;
        for (const SeparationBin& b : sep.bins) {
            if (!b.loaded) continue;
            ++loaded;
            if (b.gap_sigmas > 3.0) ++separated;
        }
        report(8, "material discrimination", sep.distinguishable,
               fmt("distinguishable=%d (%d/%d bins with gap > 3 sigma)",
                   sep.distinguishable ? 1 : 0, separated, loaded));
    }

    std::printf("%d/8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
