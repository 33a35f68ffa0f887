import math

import pytest

import caprox as cx


def truth_model():
    profile = cx.human_arm_profile()
    return cx.CalibrationModel(profile.alpha_true, profile.beta_true), profile


def test_forward_noiseless_matches_law():
    model, profile = truth_model()
    profile.noise_sigma = 0.0
    cfg = cx.SensorConfig()
    rng = cx.Rng(1)
    s = cx.forward_delta_c(5.0, profile, cfg, rng)
    assert s.delta_c == pytest.approx(84.38 / 5.0 - 4.681, abs=1e-12)
    assert not s.saturated
    # beyond range: plateau reading, flagged saturated
    far = cx.forward_delta_c(12.0, profile, cfg, rng)
    assert far.saturated
    assert far.delta_c == pytest.approx(3.757, abs=1e-12)


def test_estimator_round_trip_and_contact_threshold():
    model, _ = truth_model()
    assert cx.estimate_distance(84.38 / 5.0 - 4.681, model) == pytest.approx(5.0, abs=1e-9)
    assert not cx.detect_contact(164.0, model)
    assert cx.detect_contact(165.0, model)


def test_forward_rejects_nonpositive_distance():
    _, profile = truth_model()
    with pytest.raises(cx.PreconditionError):
        cx.forward_delta_c(0.0, profile, cx.SensorConfig(), cx.Rng(1))


def test_calibrate_then_fit_recovers_constants():
    profile = cx.human_arm_profile()
    profile.noise_sigma = 0.0
    arm = cx.ArmModel()
    data = cx.run_calibration_sweep(arm, profile, cx.SensorConfig(), 6, cx.Rng(7))
    assert len(data) == 6 * 1500
    model = cx.fit_model(data)
    assert model.alpha == pytest.approx(profile.alpha_true, rel=1e-6)
    assert model.beta == pytest.approx(profile.beta_true, abs=1e-5)
    assert model.r_squared > 0.999


def test_derive_seed_folds_like_cpp_paths():
    a = cx.derive_seed(1, [2, 3, 4])
    b = cx.derive_seed(cx.derive_seed(1, [2]), [3, 4])
    assert a == b
    assert cx.derive_seed(1, [2]) != cx.derive_seed(1, [3])


def test_single_trial_runs_and_classifies(tmp_path):
    model, profile = truth_model()
    arm = cx.ArmModel()
    scenario = cx.Scenario()
    scenario.start_offset = 20.0
    log = cx.run_trial(scenario, arm, model, profile, cx.SensorConfig(),
                       cx.ControllerConfig(), cx.EnvironmentConfig(), cx.Rng(99))
    assert log.outcome == cx.Outcome.success
    assert not log.any_halt()
    stats = cx.steady_state_stats(log, 5.0)
    assert stats.acquisition_step >= 0
    assert stats.band_fraction() > 0.5

    out = tmp_path / "trial.csv"
    cx.export_csv(log, str(out))
    lines = out.read_text().splitlines()
    assert lines[0] == ("t_s,ee_x_cm,ee_z_cm,true_dist_cm,delta_c,d_est_cm,"
                        "error_cm,u_z_cm_s,force_n,contact,halted")
    assert len(lines) == len(log) + 1
    back = cx.load_trial_csv(str(out))
    assert len(back) == len(log)
    assert back.d_est[-1] == pytest.approx(log.d_est[-1], abs=1e-6)


def test_small_matrix_is_deterministic(tmp_path):
    mc = cx.MatrixConfig()
    mc.n_subjects = 2
    mc.reps = 1
    mc.start_offsets = [10.0]
    mc.include_motion_block = False
    args = (mc, cx.human_arm_profile(), cx.SensorConfig(), cx.ControllerConfig(),
            cx.EnvironmentConfig(), 1)
    first = cx.run_matrix(*args)
    again = cx.run_matrix(*args)
    assert len(first.records) == 2 * 1 * 1 * 2  # subjects x reps x offsets x modes
    assert [r.trial_id for r in first.records] == [r.trial_id for r in again.records]
    assert [r.seed for r in first.records] == [r.seed for r in again.records]
    assert [cx.outcome_name(r.outcome) for r in first.records] == \
        [cx.outcome_name(r.outcome) for r in again.records]
    closed = [r for r in first.records if r.mode == cx.ControlMode.closed_loop]
    assert all(r.outcome == cx.Outcome.success for r in closed)

    out = tmp_path / "matrix"
    cx.run_matrix(mc, cx.human_arm_profile(), cx.SensorConfig(), cx.ControllerConfig(),
                  cx.EnvironmentConfig(), 1, str(out))
    assert (out / "summary.csv").exists()
    assert (out / "trial_index.csv").exists()
    assert (out / "model.json").exists()


def test_config_round_trip(tmp_path):
    cfg = cx.AppConfig()
    cfg.controller.kp = 1.7
    path = tmp_path / "config.json"
    cfg.save(str(path))
    loaded = cx.AppConfig.load(str(path))
    assert loaded.controller.kp == pytest.approx(1.7)
    assert loaded.resolve_profile().name == "human_arm"
    with pytest.raises(cx.IoError):
        cx.AppConfig.load(str(tmp_path / "missing.json"))
