#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "caprox/config.hpp"
#include "caprox/errors.hpp"

namespace py = pybind11;
using namespace caprox;

PYBIND11_MODULE(_core, m) {
    m.doc() = "capacitive proximity distance-servoing simulator core";

    // Most-derived exceptions are registered last so their translators run
    // first; each maps to a distinct Python type carrying the exit code.
    py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<PreconditionError>(m, "PreconditionError");
    py::register_exception<FitError>(m, "FitError");
    py::register_exception<IoError>(m, "IoError");

    m.attr("CONTACT_DISTANCE_CM") = kContactDistanceCm;
    m.attr("DISTANCE_FLOOR_CM") = kDistanceFloorCm;
    m.attr("DEFAULT_RANGE_MAX_CM") = kDefaultRangeMaxCm;

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("next_u64", &Rng::next_u64)
        .def("uniform", py::overload_cast<>(&Rng::uniform))
        .def("uniform", py::overload_cast<double, double>(&Rng::uniform))
        .def("gaussian", py::overload_cast<>(&Rng::gaussian))
        .def("gaussian", py::overload_cast<double, double>(&Rng::gaussian))
        .def_property_readonly("seed", &Rng::seed);
    m.def(
        "derive_seed",
        [](std::uint64_t master, const std::vector<std::uint64_t>& path) {
            std::uint64_t h = master;
            for (std::uint64_t k : path) h = derive_seed(h, {k});
            return h;
        },
        py::arg("master"), py::arg("path"));

    py::class_<MaterialProfile>(m, "MaterialProfile")
        .def(py::init<>())
        .def_readwrite("name", &MaterialProfile::name)
        .def_readwrite("alpha_true", &MaterialProfile::alpha_true)
        .def_readwrite("beta_true", &MaterialProfile::beta_true)
        .def_readwrite("range_max", &MaterialProfile::range_max)
        .def_readwrite("noise_sigma", &MaterialProfile::noise_sigma)
        .def("validate", &MaterialProfile::validate);
    m.def("human_arm_profile", &human_arm_profile);
    m.def("gown_on_table_profile", &gown_on_table_profile);

    py::class_<SensorConfig>(m, "SensorConfig")
        .def(py::init<>())
        .def_readwrite("sample_rate", &SensorConfig::sample_rate)
        .def_readwrite("emi_bias", &SensorConfig::emi_bias)
        .def_readwrite("clothing_attenuation", &SensorConfig::clothing_attenuation)
        .def("validate", &SensorConfig::validate);

    py::class_<DeltaCSample>(m, "DeltaCSample")
        .def_readonly("t", &DeltaCSample::t)
        .def_readonly("delta_c", &DeltaCSample::delta_c)
        .def_readonly("saturated", &DeltaCSample::saturated);

    py::class_<CalibrationModel>(m, "CalibrationModel")
        .def(py::init<>())
        .def(py::init([](double alpha, double beta) {
                 CalibrationModel model;
                 model.alpha = alpha;
                 model.beta = beta;
                 return model;
             }),
             py::arg("alpha"), py::arg("beta"))
        .def_readwrite("alpha", &CalibrationModel::alpha)
        .def_readwrite("beta", &CalibrationModel::beta)
        .def_readwrite("r_squared", &CalibrationModel::r_squared)
        .def_readwrite("n_samples", &CalibrationModel::n_samples)
        .def("fitted", &CalibrationModel::fitted);

    m.def("forward_delta_c", &forward_delta_c, py::arg("true_distance_cm"), py::arg("profile"),
          py::arg("config"), py::arg("rng"), py::arg("t") = 0.0);
    m.def("estimate_distance", &estimate_distance, py::arg("delta_c"), py::arg("model"),
          py::arg("d_floor") = kDistanceFloorCm, py::arg("d_ceiling") = kDefaultRangeMaxCm);
    m.def("detect_contact", &detect_contact, py::arg("delta_c"), py::arg("model"));

    py::class_<SweepDataset>(m, "SweepDataset")
        .def(py::init<>())
        .def_readwrite("t", &SweepDataset::t)
        .def_readwrite("location_x", &SweepDataset::location_x)
        .def_readwrite("delta_c", &SweepDataset::delta_c)
        .def_readwrite("distance", &SweepDataset::distance)
        .def_readwrite("subject_id", &SweepDataset::subject_id)
        .def("__len__", &SweepDataset::size)
        .def("append", &SweepDataset::append);

    py::class_<FitEval>(m, "FitEval")
        .def_readonly("r_squared", &FitEval::r_squared)
        .def_readonly("residuals", &FitEval::residuals)
        .def_readonly("n_samples", &FitEval::n_samples);

    py::class_<SweepProtocol>(m, "SweepProtocol")
        .def(py::init<>())
        .def_readwrite("n_locations", &SweepProtocol::n_locations)
        .def_readwrite("descent_start", &SweepProtocol::descent_start)
        .def_readwrite("descent_speed", &SweepProtocol::descent_speed);

    py::class_<SeparationBin>(m, "SeparationBin")
        .def_readonly("d_lo", &SeparationBin::d_lo)
        .def_readonly("d_hi", &SeparationBin::d_hi)
        .def_readonly("mean_a", &SeparationBin::mean_a)
        .def_readonly("mean_b", &SeparationBin::mean_b)
        .def_readonly("gap_sigmas", &SeparationBin::gap_sigmas)
        .def_readonly("loaded", &SeparationBin::loaded);
    py::class_<SeparationReport>(m, "SeparationReport")
        .def_readonly("bins", &SeparationReport::bins)
        .def_readonly("distinguishable", &SeparationReport::distinguishable);

    m.def("run_calibration_sweep", &run_calibration_sweep, py::arg("arm"), py::arg("profile"),
          py::arg("config"), py::arg("n_locations"), py::arg("rng"),
          py::arg("descent_start") = 15.0, py::arg("descent_speed") = 1.0);
    m.def("fit_model", &fit_model, py::arg("data"), py::arg("range_max") = kDefaultRangeMaxCm);
    m.def("evaluate_fit", &evaluate_fit, py::arg("model"), py::arg("data"),
          py::arg("range_max") = kDefaultRangeMaxCm);
    m.def("discriminate_material", &discriminate_material, py::arg("a"), py::arg("b"));
    m.def("save_sweep_csv", &save_sweep_csv);
    m.def("load_sweep_csv", &load_sweep_csv);
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);

    py::class_<ArmModel>(m, "ArmModel")
        .def(py::init<>())
        .def_readwrite("id", &ArmModel::id)
        .def_readwrite("length", &ArmModel::length)
        .def_readwrite("fist_height", &ArmModel::fist_height)
        .def_readwrite("contour", &ArmModel::contour)
        .def_readwrite("sensed_surface_offset", &ArmModel::sensed_surface_offset)
        .def("validate", &ArmModel::validate)
        .def("contour_offset", &ArmModel::contour_offset);
    m.def("surface_height", &surface_height, py::arg("arm"), py::arg("tilt_cm"), py::arg("x_cm"));
    m.def("make_subject", &make_subject, py::arg("index"), py::arg("rng"));

    py::enum_<MotionKind>(m, "MotionKind")
        .value("static_arm", MotionKind::static_arm)
        .value("scripted_tilt", MotionKind::scripted_tilt)
        .value("random_tilt", MotionKind::random_tilt);
    py::class_<MotionProfile>(m, "MotionProfile")
        .def(py::init<>())
        .def_static("static_arm", &MotionProfile::static_arm)
        .def_static("scripted", &MotionProfile::scripted, py::arg("amplitude") = 20.0,
                    py::arg("period_s") = 10.0)
        .def_static("random", &MotionProfile::random, py::arg("amplitude") = 20.0,
                    py::arg("seed") = 0)
        .def_readwrite("kind", &MotionProfile::kind)
        .def_readwrite("amplitude", &MotionProfile::amplitude)
        .def_readwrite("rate_limit", &MotionProfile::rate_limit)
        .def_readwrite("period_s", &MotionProfile::period_s)
        .def_readwrite("tau_v", &MotionProfile::tau_v)
        .def_readwrite("sigma_v", &MotionProfile::sigma_v)
        .def_readwrite("seed", &MotionProfile::seed)
        .def("validate", &MotionProfile::validate);
    py::class_<MotionState>(m, "MotionState")
        .def(py::init<>())
        .def_readwrite("tilt", &MotionState::tilt)
        .def_readwrite("tilt_vel", &MotionState::tilt_vel);
    m.def("step_motion", &step_motion, py::arg("profile"), py::arg("state"), py::arg("t"),
          py::arg("dt"), py::arg("rng"));
    m.def("contact_force", &contact_force, py::arg("penetration_cm"),
          py::arg("stiffness_n_per_cm") = kDefaultStiffnessNPerCm);

    py::class_<GarmentConfig>(m, "GarmentConfig")
        .def(py::init<>())
        .def_static("gown", &GarmentConfig::gown)
        .def_static("cardigan", &GarmentConfig::cardigan)
        .def_readwrite("name", &GarmentConfig::name)
        .def_readwrite("capture_low", &GarmentConfig::capture_low)
        .def_readwrite("capture_high", &GarmentConfig::capture_high)
        .def_readwrite("sleeve_length_factor", &GarmentConfig::sleeve_length_factor)
        .def("validate", &GarmentConfig::validate);

    py::enum_<Outcome>(m, "Outcome")
        .value("success", Outcome::success)
        .value("caught", Outcome::caught)
        .value("missed", Outcome::missed)
        .value("halted", Outcome::halted)
        .value("incomplete", Outcome::incomplete);
    m.def("outcome_name", &outcome_name);
    m.def("outcome_from_name", &outcome_from_name);

    py::class_<ControllerConfig>(m, "ControllerConfig")
        .def(py::init<>())
        .def_readwrite("kp", &ControllerConfig::kp)
        .def_readwrite("kd", &ControllerConfig::kd)
        .def_readwrite("d_desired", &ControllerConfig::d_desired)
        .def_readwrite("x_step", &ControllerConfig::x_step)
        .def_readwrite("control_rate", &ControllerConfig::control_rate)
        .def_readwrite("force_limit", &ControllerConfig::force_limit)
        .def_readwrite("z_rate_limit", &ControllerConfig::z_rate_limit)
        .def("validate", &ControllerConfig::validate)
        .def("dt", &ControllerConfig::dt);
    py::class_<ControllerState>(m, "ControllerState")
        .def(py::init<>())
        .def_readwrite("prev_error", &ControllerState::prev_error)
        .def_readwrite("has_prev_error", &ControllerState::has_prev_error)
        .def_readwrite("halted", &ControllerState::halted)
        .def_readwrite("misuse_flagged", &ControllerState::misuse_flagged);
    py::class_<Command>(m, "Command")
        .def_readonly("dx", &Command::dx)
        .def_readonly("dz", &Command::dz)
        .def_readonly("u_z", &Command::u_z)
        .def_readonly("e", &Command::e);
    m.def("pd_step", &pd_step, py::arg("state"), py::arg("d_measured"), py::arg("dt"),
          py::arg("config"));
    m.def("open_loop_step", &open_loop_step, py::arg("state"), py::arg("config"));
    m.def("force_monitor", &force_monitor, py::arg("force_n"), py::arg("state"),
          py::arg("config"));

    py::enum_<ControlMode>(m, "ControlMode")
        .value("closed_loop", ControlMode::closed_loop)
        .value("open_loop", ControlMode::open_loop);
    py::class_<EnvironmentConfig>(m, "EnvironmentConfig")
        .def(py::init<>())
        .def_readwrite("stiffness_n_per_cm", &EnvironmentConfig::stiffness_n_per_cm)
        .def_readwrite("sensor_overhang_cm", &EnvironmentConfig::sensor_overhang_cm)
        .def_readwrite("cloth_thickness_cm", &EnvironmentConfig::cloth_thickness_cm)
        .def("validate", &EnvironmentConfig::validate);
    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("name", &Scenario::name)
        .def_readwrite("start_offset", &Scenario::start_offset)
        .def_readwrite("mode", &Scenario::mode)
        .def_readwrite("motion", &Scenario::motion)
        .def_readwrite("garment", &Scenario::garment)
        .def_readwrite("sleeved", &Scenario::sleeved)
        .def_readwrite("start_margin", &Scenario::start_margin)
        .def_readwrite("x_extent", &Scenario::x_extent)
        .def_readwrite("max_steps", &Scenario::max_steps)
        .def("resolved_x_extent", &Scenario::resolved_x_extent)
        .def("validate", &Scenario::validate);

    py::class_<TrialMeta>(m, "TrialMeta")
        .def_readonly("scenario", &TrialMeta::scenario)
        .def_readonly("subject", &TrialMeta::subject)
        .def_readonly("garment", &TrialMeta::garment)
        .def_readonly("mode", &TrialMeta::mode)
        .def_readonly("arm_length", &TrialMeta::arm_length)
        .def_readonly("fist_height", &TrialMeta::fist_height)
        .def_readonly("seed", &TrialMeta::seed);
    py::class_<TrialLog>(m, "TrialLog")
        .def_readonly("t", &TrialLog::t)
        .def_readonly("ee_x", &TrialLog::ee_x)
        .def_readonly("ee_z", &TrialLog::ee_z)
        .def_readonly("true_dist", &TrialLog::true_dist)
        .def_readonly("delta_c", &TrialLog::delta_c)
        .def_readonly("d_est", &TrialLog::d_est)
        .def_readonly("error", &TrialLog::error)
        .def_readonly("u_z", &TrialLog::u_z)
        .def_readonly("force", &TrialLog::force)
        .def_readonly("tilt", &TrialLog::tilt)
        .def_readonly("contact", &TrialLog::contact)
        .def_readonly("halted", &TrialLog::halted)
        .def_readonly("outcome", &TrialLog::outcome)
        .def_readonly("meta", &TrialLog::meta)
        .def("__len__", &TrialLog::size)
        .def("any_halt", &TrialLog::any_halt);
    py::class_<ContactEpisode>(m, "ContactEpisode")
        .def_readonly("first_step", &ContactEpisode::first_step)
        .def_readonly("t_start", &ContactEpisode::t_start)
        .def_readonly("duration_s", &ContactEpisode::duration_s)
        .def_readonly("peak_force_n", &ContactEpisode::peak_force_n);
    py::class_<SteadyStats>(m, "SteadyStats")
        .def_readonly("acquisition_step", &SteadyStats::acquisition_step)
        .def_readonly("n_steady", &SteadyStats::n_steady)
        .def_readonly("n_in_band", &SteadyStats::n_in_band)
        .def("band_fraction", &SteadyStats::band_fraction)
        .def("est_err_mean", &SteadyStats::est_err_mean)
        .def("est_err_std", &SteadyStats::est_err_std)
        .def("true_err_mean", &SteadyStats::true_err_mean)
        .def("true_err_std", &SteadyStats::true_err_std);

    m.def("run_trial", &run_trial, py::arg("scenario"), py::arg("arm"), py::arg("model"),
          py::arg("profile"), py::arg("sensor"), py::arg("ctrl"), py::arg("env"), py::arg("rng"));
    m.def("classify_outcome", &classify_outcome, py::arg("log"), py::arg("arm"),
          py::arg("garment"));
    m.def("report_contacts", &report_contacts, py::arg("log"));
    m.def("steady_state_stats", &steady_state_stats, py::arg("log"), py::arg("d_desired"),
          py::arg("band_lo") = 4.0, py::arg("band_hi") = 6.0);
    m.def("export_csv", &export_csv, py::arg("log"), py::arg("path"));
    m.def("load_trial_csv", &load_trial_csv, py::arg("path"));

    py::class_<TrialRecord>(m, "TrialRecord")
        .def_readonly("trial_id", &TrialRecord::trial_id)
        .def_readonly("block", &TrialRecord::block)
        .def_readonly("scenario", &TrialRecord::scenario)
        .def_readonly("subject", &TrialRecord::subject)
        .def_readonly("subject_id", &TrialRecord::subject_id)
        .def_readonly("rep", &TrialRecord::rep)
        .def_readonly("start_offset", &TrialRecord::start_offset)
        .def_readonly("mode", &TrialRecord::mode)
        .def_readonly("garment", &TrialRecord::garment)
        .def_readonly("sleeved", &TrialRecord::sleeved)
        .def_readonly("seed", &TrialRecord::seed)
        .def_readonly("outcome", &TrialRecord::outcome)
        .def_readonly("steps", &TrialRecord::steps)
        .def_readonly("steady", &TrialRecord::steady)
        .def_readonly("episodes", &TrialRecord::episodes)
        .def_readonly("episode_max_s", &TrialRecord::episode_max_s)
        .def_readonly("peak_force_n", &TrialRecord::peak_force_n)
        .def_readonly("halted", &TrialRecord::halted);
    py::class_<ScenarioAggregate>(m, "ScenarioAggregate")
        .def_readonly("scenario", &ScenarioAggregate::scenario)
        .def_readonly("trials", &ScenarioAggregate::trials)
        .def_readonly("n_success", &ScenarioAggregate::n_success)
        .def_readonly("n_caught", &ScenarioAggregate::n_caught)
        .def_readonly("n_missed", &ScenarioAggregate::n_missed)
        .def_readonly("n_halted", &ScenarioAggregate::n_halted)
        .def_readonly("n_incomplete", &ScenarioAggregate::n_incomplete)
        .def_readonly("pooled", &ScenarioAggregate::pooled)
        .def_readonly("band_fraction_min", &ScenarioAggregate::band_fraction_min)
        .def_readonly("episodes", &ScenarioAggregate::episodes)
        .def_readonly("episode_max_s", &ScenarioAggregate::episode_max_s)
        .def_readonly("episode_peak_n", &ScenarioAggregate::episode_peak_n);
    py::class_<SummaryReport>(m, "SummaryReport")
        .def_readonly("scenarios", &SummaryReport::scenarios);
    py::class_<MatrixConfig>(m, "MatrixConfig")
        .def(py::init<>())
        .def_readwrite("n_subjects", &MatrixConfig::n_subjects)
        .def_readwrite("reps", &MatrixConfig::reps)
        .def_readwrite("start_offsets", &MatrixConfig::start_offsets)
        .def_readwrite("include_motion_block", &MatrixConfig::include_motion_block)
        .def_readwrite("motion_start_offset", &MatrixConfig::motion_start_offset)
        .def_readwrite("parallel", &MatrixConfig::parallel)
        .def_readwrite("max_steps", &MatrixConfig::max_steps)
        .def("validate", &MatrixConfig::validate);
    py::class_<MatrixResult>(m, "MatrixResult")
        .def_readonly("model", &MatrixResult::model)
        .def_readonly("records", &MatrixResult::records)
        .def_readonly("summary", &MatrixResult::summary);
    m.def("run_matrix", &run_matrix, py::arg("matrix"), py::arg("profile"), py::arg("sensor"),
          py::arg("ctrl"), py::arg("env"), py::arg("master_seed"), py::arg("out_dir") = "",
          py::call_guard<py::gil_scoped_release>());
    m.def("summarize", &summarize, py::arg("records"));
    m.def("save_summary_csv", &save_summary_csv, py::arg("report"), py::arg("path"));
    m.def("save_trial_index_csv", &save_trial_index_csv, py::arg("records"), py::arg("path"));

    py::class_<AppConfig>(m, "AppConfig")
        .def(py::init<>())
        .def_static("load", &AppConfig::load, py::arg("path"))
        .def("save", &AppConfig::save, py::arg("path"))
        .def_readwrite("sensor", &AppConfig::sensor)
        .def_readwrite("profile_name", &AppConfig::profile_name)
        .def_readwrite("profiles", &AppConfig::profiles)
        .def_readwrite("arm", &AppConfig::arm)
        .def_readwrite("environment", &AppConfig::environment)
        .def_readwrite("controller", &AppConfig::controller)
        .def_readwrite("garments", &AppConfig::garments)
        .def_readwrite("motion", &AppConfig::motion)
        .def_readwrite("scenario", &AppConfig::scenario)
        .def_readwrite("garment_name", &AppConfig::garment_name)
        .def_readwrite("matrix", &AppConfig::matrix)
        .def_readwrite("calibration", &AppConfig::calibration)
        .def("resolve_profile", &AppConfig::resolve_profile,
             py::return_value_policy::reference_internal)
        .def("resolve_garment", &AppConfig::resolve_garment,
             py::return_value_policy::reference_internal)
        .def("resolve_scenario", &AppConfig::resolve_scenario)
        .def("validate", &AppConfig::validate);
}
