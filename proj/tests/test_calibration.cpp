#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "caprox/calibration.hpp"
#include "caprox/environment.hpp"
#include "caprox/errors.hpp"
#include "doctest.h"

using namespace caprox;
using doctest::Approx;

namespace {

MaterialProfile arm_profile(double sigma) {
    MaterialProfile p = human_arm_profile();
    p.noise_sigma = sigma;
    return p;
}

SweepDataset default_sweep(double sigma, std::uint64_t seed) {
    Rng rng(seed);
    return run_calibration_sweep(ArmModel{}, arm_profile(sigma), SensorConfig{}, 6, rng);
}

std::string temp_file(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("sweep covers six locations with a 1500-sample descent each") {
    SweepDataset data = default_sweep(0.0, 1);
    REQUIRE(data.size() == 9000);
    CHECK(data.subject_id == "default");

    // Locations are equally spaced fist to shoulder: 0, 14, ..., 70.
    CHECK(data.location_x[0] == Approx(0.0));
    CHECK(data.location_x[1500] == Approx(14.0));
    CHECK(data.location_x[8999] == Approx(70.0));

    // Each descent runs 15 cm down to 0.01 cm at 1 cm/s, sampled at 100 Hz.
    CHECK(data.distance[0] == Approx(15.0));
    CHECK(data.distance[1] == Approx(14.99));
    CHECK(data.distance[1499] == Approx(0.01));
    CHECK(data.distance[1500] == Approx(15.0));  // next location restarts

    // Time is cumulative across the whole sweep.
    CHECK(data.t[0] == Approx(0.0));
    CHECK(data.t[1] == Approx(0.01));
    CHECK(data.t[8999] == Approx(89.99));

    // Single location lands mid-forearm.
    Rng rng(1);
    SweepDataset one = run_calibration_sweep(ArmModel{}, arm_profile(0.0), SensorConfig{}, 1, rng);
    CHECK(one.size() == 1500);
    CHECK(one.location_x[0] == Approx(35.0));
}

TEST_CASE("sweep rejects bad protocol parameters") {
    Rng rng(1);
    CHECK_THROWS_AS(
        run_calibration_sweep(ArmModel{}, arm_profile(0.0), SensorConfig{}, 0, rng),
        PreconditionError);
    CHECK_THROWS_AS(run_calibration_sweep(ArmModel{}, arm_profile(0.0), SensorConfig{}, 6, rng,
                                          0.0, 1.0),
                    ConfigError);
    CHECK_THROWS_AS(run_calibration_sweep(ArmModel{}, arm_profile(0.0), SensorConfig{}, 6, rng,
                                          15.0, -1.0),
                    ConfigError);
}

TEST_CASE("noiseless fit recovers the generative constants") {
    SweepDataset data = default_sweep(0.0, 1);
    CalibrationModel m = fit_model(data);
    CHECK(std::abs(m.alpha - 84.38) / 84.38 < 1e-6);
    CHECK(std::abs(m.beta - 4.681) / 4.681 < 1e-6);
    CHECK(m.r_squared > 0.999999);
    // Only the in-range part of the descent enters the fit: 10.00..0.01 cm.
    CHECK(m.n_samples == 6 * 1000);

    // Refitting the same data reproduces the same model exactly.
    CalibrationModel m2 = fit_model(data);
    CHECK(m.alpha == m2.alpha);
    CHECK(m.beta == m2.beta);
    CHECK(m.r_squared == m2.r_squared);
}

TEST_CASE("fit is consistent under count rescaling") {
    // d = alpha/(dc + beta) implies scaling counts by c scales both constants.
    SweepDataset data = default_sweep(0.0, 1);
    SweepDataset scaled = data;
    for (double& dc : scaled.delta_c) dc *= 2.0;
    CalibrationModel m = fit_model(data);
    CalibrationModel ms = fit_model(scaled);
    CHECK(ms.alpha == Approx(2.0 * m.alpha).epsilon(1e-6));
    CHECK(ms.beta == Approx(2.0 * m.beta).epsilon(1e-6));
}

TEST_CASE("noisy fit matches the published quality") {
    SweepDataset data = default_sweep(1.03, 7);
    CalibrationModel m = fit_model(data);
    CHECK(std::abs(m.r_squared - 0.969) < 0.02);

    // Count noise enters through the independent variable, so the parameters
    // themselves drift upward together (the law is convex in counts); what a
    // calibration must deliver is the curve, which stays within a quarter of
    // the control band of the generative one across the servo range.
    for (double d = 3.0; d <= 8.0; d += 0.25) {
        double dc = 84.38 / d - 4.681;
        CHECK(std::abs(m.alpha / (dc + m.beta) - d) < 0.5);
    }

    // More noise, lower R^2.
    CalibrationModel mid = fit_model(default_sweep(0.3, 7));
    CHECK(mid.r_squared > m.r_squared);
    CHECK(fit_model(default_sweep(0.0, 7)).r_squared > mid.r_squared);
}

TEST_CASE("degenerate datasets are rejected") {
    SweepDataset tiny;
    tiny.t = {0.0, 0.01};
    tiny.location_x = {0.0, 0.0};
    tiny.delta_c = {10.0, 20.0};
    tiny.distance = {5.0, 4.0};
    CHECK_THROWS_AS(fit_model(tiny), FitError);

    SweepDataset flat_dc;
    flat_dc.t = {0.0, 0.01, 0.02, 0.03};
    flat_dc.location_x = {0.0, 0.0, 0.0, 0.0};
    flat_dc.delta_c = {10.0, 10.0, 10.0, 10.0};
    flat_dc.distance = {5.0, 4.0, 3.0, 2.0};
    CHECK_THROWS_AS(fit_model(flat_dc), FitError);

    SweepDataset bad_d;
    bad_d.t = {0.0, 0.01, 0.02, 0.03};
    bad_d.location_x = {0.0, 0.0, 0.0, 0.0};
    bad_d.delta_c = {10.0, 20.0, 30.0, 40.0};
    bad_d.distance = {5.0, 4.0, 0.0, 2.0};
    CHECK_THROWS_AS(fit_model(bad_d), FitError);

    // Out-of-range samples do not count toward the minimum.
    SweepDataset far;
    far.t = {0.0, 0.01, 0.02, 0.03};
    far.location_x = {0.0, 0.0, 0.0, 0.0};
    far.delta_c = {1.0, 2.0, 3.0, 4.0};
    far.distance = {15.0, 14.0, 13.0, 12.0};
    CHECK_THROWS_AS(fit_model(far), FitError);
}

TEST_CASE("evaluate_fit reproduces the fit's own R^2") {
    SweepDataset data = default_sweep(1.03, 3);
    CalibrationModel m = fit_model(data);
    FitEval ev = evaluate_fit(m, data);
    CHECK(ev.r_squared == Approx(m.r_squared).epsilon(1e-9));
    CHECK(ev.n_samples == m.n_samples);
    CHECK(static_cast<long>(ev.residuals.size()) == ev.n_samples);

    CalibrationModel unfitted;
    CHECK_THROWS_AS(evaluate_fit(unfitted, data), ConfigError);

    SweepDataset all_far;
    all_far.t = {0.0};
    all_far.location_x = {0.0};
    all_far.delta_c = {1.0};
    all_far.distance = {12.0};
    CHECK_THROWS_AS(evaluate_fit(m, all_far), PreconditionError);
}

TEST_CASE("arm and gown sweeps are distinguishable, a sweep and itself is not") {
    Rng rng_a(11), rng_b(12), rng_c(13);
    SweepDataset arm = run_calibration_sweep(ArmModel{}, human_arm_profile(), SensorConfig{}, 6,
                                             rng_a);
    SweepDataset gown = run_calibration_sweep(ArmModel{}, gown_on_table_profile(), SensorConfig{},
                                              6, rng_b);
    SeparationReport rep = discriminate_material(arm, gown);
    CHECK(rep.distinguishable);
    CHECK(rep.bins.size() == 20);

    SweepDataset arm2 = run_calibration_sweep(ArmModel{}, human_arm_profile(), SensorConfig{}, 6,
                                              rng_c);
    CHECK_FALSE(discriminate_material(arm, arm2).distinguishable);

    SweepDataset empty;
    CHECK_THROWS_AS(discriminate_material(arm, empty), PreconditionError);

    SweepDataset lo, hi;  // disjoint distance support
    for (int i = 0; i < 10; ++i) {
        lo.t.push_back(i);
        lo.location_x.push_back(0.0);
        lo.delta_c.push_back(100.0 + i);
        lo.distance.push_back(0.6);
        hi.t.push_back(i);
        hi.location_x.push_back(0.0);
        hi.delta_c.push_back(5.0 + i);
        hi.distance.push_back(9.4);
    }
    CHECK_THROWS_AS(discriminate_material(lo, hi), PreconditionError);
}

TEST_CASE("sweep CSV round-trips") {
    SweepDataset data = default_sweep(1.03, 5);
    data.subject_id = "s3";
    std::string path = temp_file("caprox_test_sweep.csv");
    save_sweep_csv(data, path);
    SweepDataset back = load_sweep_csv(path);
    REQUIRE(back.size() == data.size());
    CHECK(back.subject_id == "s3");
    for (std::size_t i = 0; i < data.size(); i += 997) {
        CHECK(back.t[i] == Approx(data.t[i]).epsilon(1e-9));
        CHECK(back.location_x[i] == Approx(data.location_x[i]).epsilon(1e-9));
        CHECK(back.delta_c[i] == Approx(data.delta_c[i]).scale(1.0).epsilon(1e-6));
        CHECK(back.distance[i] == Approx(data.distance[i]).epsilon(1e-9));
    }
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_sweep_csv(temp_file("caprox_nonexistent.csv")), IoError);

    std::string bad = temp_file("caprox_bad_sweep.csv");
    {
        std::FILE* f = std::fopen(bad.c_str(), "w");
        std::fputs("wrong,header\n1,2\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_sweep_csv(bad), IoError);
    std::remove(bad.c_str());
}

TEST_CASE("model JSON round-trips exactly") {
    CalibrationModel m = fit_model(default_sweep(1.03, 9));
    std::string path = temp_file("caprox_test_model.json");
    save_model(m, path);
    CalibrationModel back = load_model(path);
    CHECK(back.alpha == m.alpha);
    CHECK(back.beta == m.beta);
    CHECK(back.r_squared == m.r_squared);
    CHECK(back.n_samples == m.n_samples);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_model(temp_file("caprox_nonexistent.json")), IoError);

    std::string bad = temp_file("caprox_bad_model.json");
    {
        std::FILE* f = std::fopen(bad.c_str(), "w");
        std::fputs("{not json", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_model(bad), IoError);
    {
        std::FILE* f = std::fopen(bad.c_str(), "w");
        std::fputs("{\"alpha\": -1, \"beta\": 2, \"r_squared\": 0.9, \"n_samples\": 10}", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_model(bad), ConfigError);
    std::remove(bad.c_str());
}

TEST_CASE("append concatenates datasets") {
    SweepDataset a = default_sweep(0.0, 1);
    SweepDataset b = default_sweep(0.0, 2);
    std::size_t na = a.size();
    a.append(b);
    CHECK(a.size() == na + b.size());
    CHECK(a.distance[na] == b.distance[0]);
}
