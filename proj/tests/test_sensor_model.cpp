#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "caprox/errors.hpp"
#include "caprox/sensor_model.hpp"
#include "doctest.h"

using namespace caprox;
using doctest::Approx;

namespace {

MaterialProfile noiseless_arm() {
    MaterialProfile p = human_arm_profile();
    p.noise_sigma = 0.0;
    return p;
}

CalibrationModel truth_model(const MaterialProfile& p) {
    CalibrationModel m;
    m.alpha = p.alpha_true;
    m.beta = p.beta_true;
    return m;
}

}  // namespace

TEST_CASE("bundled profiles carry the published constants") {
    MaterialProfile arm = human_arm_profile();
    CHECK(arm.name == "human_arm");
    CHECK(arm.alpha_true == Approx(84.38));
    CHECK(arm.beta_true == Approx(4.681));
    CHECK(arm.range_max == Approx(10.0));
    CHECK(arm.noise_sigma == Approx(1.03));
    arm.validate();

    MaterialProfile gown = gown_on_table_profile();
    CHECK(gown.name == "gown_on_table");
    CHECK(gown.alpha_true == Approx(12.0));
    CHECK(gown.beta_true == Approx(2.0));
    CHECK(gown.noise_sigma == Approx(0.2));
    gown.validate();
}

TEST_CASE("noiseless forward model follows the inverse law") {
    MaterialProfile p = noiseless_arm();
    SensorConfig cfg;
    Rng rng(1);

    DeltaCSample s = forward_delta_c(5.0, p, cfg, rng, 3.25);
    CHECK(s.delta_c == Approx(12.195).epsilon(1e-12));  // 84.38/5 - 4.681
    CHECK(s.t == Approx(3.25));
    CHECK_FALSE(s.saturated);

    CHECK(forward_delta_c(1.0, p, cfg, rng).delta_c == Approx(79.699).epsilon(1e-12));
    CHECK(forward_delta_c(2.0, p, cfg, rng).delta_c == Approx(37.509).epsilon(1e-12));
}

TEST_CASE("readings plateau past the sensing range") {
    MaterialProfile p = noiseless_arm();
    SensorConfig cfg;
    Rng rng(1);

    DeltaCSample at_range = forward_delta_c(10.0, p, cfg, rng);
    CHECK(at_range.delta_c == Approx(3.757).epsilon(1e-12));  // 84.38/10 - 4.681
    CHECK_FALSE(at_range.saturated);  // saturation is strictly beyond range

    for (double d : {10.000001, 12.0, 50.0, 1e6}) {
        DeltaCSample far = forward_delta_c(d, p, cfg, rng);
        CHECK(far.saturated);
        CHECK(far.delta_c == Approx(3.757).epsilon(1e-12));
    }
}

TEST_CASE("attenuation and EMI bias shift the reading as configured") {
    MaterialProfile p = noiseless_arm();
    Rng rng(1);

    SensorConfig attenuated;
    attenuated.clothing_attenuation = 0.5;
    CHECK(forward_delta_c(5.0, p, attenuated, rng).delta_c == Approx(6.0975).epsilon(1e-12));

    SensorConfig biased;
    biased.emi_bias = 2.0;
    CHECK(forward_delta_c(5.0, p, biased, rng).delta_c == Approx(14.195).epsilon(1e-12));
}

TEST_CASE("counts never go negative") {
    // Noiseless gown at range: 12/10 - 2 = -0.8, clipped to zero.
    MaterialProfile gown = gown_on_table_profile();
    gown.noise_sigma = 0.0;
    SensorConfig cfg;
    Rng rng(1);
    CHECK(forward_delta_c(10.0, gown, cfg, rng).delta_c == 0.0);

    // With noise the clip still holds for every draw.
    gown.noise_sigma = 0.2;
    for (int i = 0; i < 2000; ++i) {
        CHECK(forward_delta_c(9.99, gown, cfg, rng).delta_c >= 0.0);
    }
}

TEST_CASE("non-positive distances are rejected") {
    MaterialProfile p = noiseless_arm();
    SensorConfig cfg;
    Rng rng(1);
    CHECK_THROWS_AS(forward_delta_c(0.0, p, cfg, rng), PreconditionError);
    CHECK_THROWS_AS(forward_delta_c(-1.0, p, cfg, rng), PreconditionError);
}

TEST_CASE("noise statistics match the profile") {
    MaterialProfile p = human_arm_profile();
    SensorConfig cfg;
    Rng rng(123);
    const double law = 84.38 / 5.0 - 4.681;

    double sum = 0.0, sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double v = forward_delta_c(5.0, p, cfg, rng).delta_c;
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / n;
    double sd = std::sqrt(sumsq / n - mean * mean);
    CHECK(mean == Approx(law).epsilon(0.01));
    CHECK(sd == Approx(1.03).epsilon(0.05));
}

TEST_CASE("same seed gives the same reading stream") {
    MaterialProfile p = human_arm_profile();
    SensorConfig cfg;
    Rng a(42), b(42), c(43);
    bool diverged = false;
    for (int i = 0; i < 100; ++i) {
        double va = forward_delta_c(5.0, p, cfg, a).delta_c;
        double vb = forward_delta_c(5.0, p, cfg, b).delta_c;
        double vc = forward_delta_c(5.0, p, cfg, c).delta_c;
        CHECK(va == vb);
        if (va != vc) diverged = true;
    }
    CHECK(diverged);
}

TEST_CASE("estimator inverts the law and clamps") {
    CalibrationModel m = truth_model(noiseless_arm());

    CHECK(estimate_distance(12.195, m) == Approx(5.0).epsilon(1e-12));
    CHECK(estimate_distance(79.699, m) == Approx(1.0).epsilon(1e-12));

    // alpha/beta = 18.03 cm at zero counts: clamped to the ceiling.
    CHECK(estimate_distance(0.0, m) == 10.0);
    CHECK(estimate_distance(1e9, m) == Approx(0.1));  // floor
    CHECK(estimate_distance(0.0, m, 0.1, 7.5) == 7.5);
    CHECK(estimate_distance(1e9, m, 0.25, 10.0) == Approx(0.25));
}

TEST_CASE("non-positive denominator reads as far") {
    CalibrationModel m;
    m.alpha = 50.0;
    m.beta = 0.0;
    CHECK(estimate_distance(0.0, m) == 10.0);
    m.beta = -2.0;
    CHECK(estimate_distance(1.0, m) == 10.0);  // den = -1
    CHECK_FALSE(detect_contact(1.0, m));
}

TEST_CASE("estimator and contact detector require a fitted model") {
    CalibrationModel unfitted;
    CHECK_THROWS_AS(estimate_distance(10.0, unfitted), ConfigError);
    CHECK_THROWS_AS(detect_contact(10.0, unfitted), ConfigError);
}

TEST_CASE("contact threshold sits between 164 and 165 counts") {
    CalibrationModel m = truth_model(noiseless_arm());
    // d(164) = 84.38/168.681 = 0.5002 cm, d(165) = 0.4973 cm
    CHECK_FALSE(detect_contact(164.0, m));
    CHECK(detect_contact(165.0, m));
    // The boundary count is alpha/0.5 - beta = 164.079.
    double boundary = 84.38 / kContactDistanceCm - 4.681;
    CHECK_FALSE(detect_contact(boundary - 1e-6, m));
    CHECK(detect_contact(boundary + 1e-6, m));
}

TEST_CASE("estimate is monotone non-increasing in counts") {
    CalibrationModel m = truth_model(noiseless_arm());
    double prev = estimate_distance(0.0, m);
    for (double dc = 0.25; dc <= 400.0; dc += 0.25) {
        double d = estimate_distance(dc, m);
        CHECK(d <= prev);
        prev = d;
    }
}

TEST_CASE("noiseless round trip is exact to 1e-9") {
    MaterialProfile p = noiseless_arm();
    CalibrationModel m = truth_model(p);
    SensorConfig cfg;
    Rng rng(1);
    for (double d = 0.5; d <= 10.0 + 1e-12; d += 0.01) {
        double dc = forward_delta_c(d, p, cfg, rng).delta_c;
        CHECK(std::abs(estimate_distance(dc, m) - d) < 1e-9);
    }
}

TEST_CASE("profile and sensor config validation") {
    MaterialProfile p = human_arm_profile();
    p.alpha_true = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = human_arm_profile();
    p.beta_true = -0.1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = human_arm_profile();
    p.range_max = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = human_arm_profile();
    p.noise_sigma = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);

    SensorConfig cfg;
    cfg.sample_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SensorConfig{};
    cfg.sample_rate = 201.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SensorConfig{};
    cfg.clothing_attenuation = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.clothing_attenuation = 1.2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SensorConfig{};
    cfg.validate();  // defaults are fine
}
