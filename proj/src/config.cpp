#include "caprox/config.hpp"

#include <fstream>
#include <initializer_list>

#include "json.hpp"

#include "caprox/errors.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace caprox {
namespace {

void expect_keys(const json& j, const std::string& section,
                 std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("unknown key '" + item.key() + "' in config section '" + section +
                              "'");
    }
}

template <typename T>
void get_if(const json& j, const char* key, T& out, const std::string& section) {
    if (!j.contains(key)) return;
    try {
        j.at(key).get_to(out);
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + section + "." + key + "'");
    }
}

MotionKind parse_motion_kind(const std::string& s) {
    if (s == "static") return MotionKind::static_arm;
    if (s == "scripted") return MotionKind::scripted_tilt;
    if (s == "random") return MotionKind::random_tilt;
    throw ConfigError("motion kind must be static, scripted, or random (got '" + s + "')");
}

const char* motion_kind_name(MotionKind k) {
    switch (k) {
        case MotionKind::static_arm: return "static";
        case MotionKind::scripted_tilt: return "scripted";
        case MotionKind::random_tilt: return "random";
    }
    return "static";
}

ControlMode parse_mode(const std::string& s) {
    if (s == "closed") return ControlMode::closed_loop;
    if (s == "open") return ControlMode::open_loop;
    throw ConfigError("scenario mode must be closed or open (got '" + s + "')");
}

void parse_sensor(const json& j, SensorConfig& out) {
    expect_keys(j, "sensor", {"sample_rate_hz", "emi_bias", "clothing_attenuation"});
    get_if(j, "sample_rate_hz", out.sample_rate, "sensor");
    get_if(j, "emi_bias", out.emi_bias, "sensor");
    get_if(j, "clothing_attenuation", out.clothing_attenuation, "sensor");
}

void parse_profiles(const json& j, std::vector<MaterialProfile>& out) {
    if (!j.is_array()) throw ConfigError("config section 'profiles' must be an array");
    for (const json& pj : j) {
        expect_keys(pj, "profiles[]",
                    {"name", "alpha_true", "beta_true", "range_max_cm", "noise_sigma"});
        if (!pj.contains("name")) throw ConfigError("profiles[] entries need a name");
        std::string name = pj.at("name").get<std::string>();
        MaterialProfile* slot = nullptr;
        for (MaterialProfile& p : out)
            if (p.name == name) slot = &p;
        if (!slot) {
            out.push_back(MaterialProfile{});
            slot = &out.back();
            slot->name = name;
        }
        get_if(pj, "alpha_true", slot->alpha_true, "profiles[]");
        get_if(pj, "beta_true", slot->beta_true, "profiles[]");
        get_if(pj, "range_max_cm", slot->range_max, "profiles[]");
        get_if(pj, "noise_sigma", slot->noise_sigma, "profiles[]");
    }
}

void parse_arm(const json& j, ArmModel& out) {
    expect_keys(j, "arm",
                {"id", "length_cm", "fist_height_cm", "sensed_surface_offset_cm", "contour"});
    get_if(j, "id", out.id, "arm");
    get_if(j, "length_cm", out.length, "arm");
    get_if(j, "fist_height_cm", out.fist_height, "arm");
    get_if(j, "sensed_surface_offset_cm", out.sensed_surface_offset, "arm");
    if (j.contains("contour")) {
        const json& cj = j.at("contour");
        if (!cj.is_array()) throw ConfigError("arm.contour must be an array of [fraction, cm]");
        out.contour.clear();
        for (const json& kj : cj) {
            if (!kj.is_array() || kj.size() != 2)
                throw ConfigError("arm.contour knots must be [fraction, cm] pairs");
            out.contour.emplace_back(kj.at(0).get<double>(), kj.at(1).get<double>());
        }
    }
}

void parse_environment(const json& j, EnvironmentConfig& out) {
    expect_keys(j, "environment",
                {"stiffness_n_per_cm", "sensor_overhang_cm", "cloth_thickness_cm"});
    get_if(j, "stiffness_n_per_cm", out.stiffness_n_per_cm, "environment");
    get_if(j, "sensor_overhang_cm", out.sensor_overhang_cm, "environment");
    get_if(j, "cloth_thickness_cm", out.cloth_thickness_cm, "environment");
}

void parse_controller(const json& j, ControllerConfig& out) {
    expect_keys(j, "controller",
                {"kp", "kd", "d_desired_cm", "x_step_cm", "control_rate_hz", "force_limit_n",
                 "z_rate_limit_cm_s"});
    get_if(j, "kp", out.kp, "controller");
    get_if(j, "kd", out.kd, "controller");
    get_if(j, "d_desired_cm", out.d_desired, "controller");
    get_if(j, "x_step_cm", out.x_step, "controller");
    get_if(j, "control_rate_hz", out.control_rate, "controller");
    get_if(j, "force_limit_n", out.force_limit, "controller");
    get_if(j, "z_rate_limit_cm_s", out.z_rate_limit, "controller");
}

void parse_garments(const json& j, std::vector<GarmentConfig>& out) {
    if (!j.is_array()) throw ConfigError("config section 'garments' must be an array");
    for (const json& gj : j) {
        expect_keys(gj, "garments[]",
                    {"name", "capture_low_cm", "capture_high_cm", "sleeve_length_factor"});
        if (!gj.contains("name")) throw ConfigError("garments[] entries need a name");
        std::string name = gj.at("name").get<std::string>();
        GarmentConfig* slot = nullptr;
        for (GarmentConfig& g : out)
            if (g.name == name) slot = &g;
        if (!slot) {
            out.push_back(GarmentConfig::gown());
            slot = &out.back();
            slot->name = name;
        }
        get_if(gj, "capture_low_cm", slot->capture_low, "garments[]");
        get_if(gj, "capture_high_cm", slot->capture_high, "garments[]");
        get_if(gj, "sleeve_length_factor", slot->sleeve_length_factor, "garments[]");
    }
}

void parse_motion(const json& j, MotionProfile& out) {
    expect_keys(j, "motion",
                {"kind", "amplitude_cm", "rate_limit_cm_s", "period_s", "tau_v_s", "sigma_v"});
    if (j.contains("kind")) {
        MotionKind kind = parse_motion_kind(j.at("kind").get<std::string>());
        // Kind-specific defaults first (scripted admits the full triangle
        // slope), explicit keys below override them.
        if (kind == MotionKind::scripted_tilt)
            out = MotionProfile::scripted();
        else if (kind == MotionKind::random_tilt)
            out = MotionProfile::random();
        else
            out = MotionProfile::static_arm();
    }
    get_if(j, "amplitude_cm", out.amplitude, "motion");
    get_if(j, "rate_limit_cm_s", out.rate_limit, "motion");
    get_if(j, "period_s", out.period_s, "motion");
    get_if(j, "tau_v_s", out.tau_v, "motion");
    get_if(j, "sigma_v", out.sigma_v, "motion");
}

void parse_scenario(const json& j, Scenario& out, std::string& garment_name) {
    expect_keys(j, "scenario",
                {"name", "start_offset_cm", "mode", "garment", "sleeved", "start_margin_cm",
                 "x_extent_cm", "max_steps"});
    get_if(j, "name", out.name, "scenario");
    get_if(j, "start_offset_cm", out.start_offset, "scenario");
    if (j.contains("mode")) out.mode = parse_mode(j.at("mode").get<std::string>());
    get_if(j, "garment", garment_name, "scenario");
    get_if(j, "sleeved", out.sleeved, "scenario");
    get_if(j, "start_margin_cm", out.start_margin, "scenario");
    get_if(j, "x_extent_cm", out.x_extent, "scenario");
    get_if(j, "max_steps", out.max_steps, "scenario");
}

void parse_matrix(const json& j, MatrixConfig& out) {
    expect_keys(j, "matrix",
                {"n_subjects", "reps", "start_offsets_cm", "include_motion_block",
                 "motion_start_offset_cm", "parallel", "max_steps"});
    get_if(j, "n_subjects", out.n_subjects, "matrix");
    get_if(j, "reps", out.reps, "matrix");
    get_if(j, "start_offsets_cm", out.start_offsets, "matrix");
    get_if(j, "include_motion_block", out.include_motion_block, "matrix");
    get_if(j, "motion_start_offset_cm", out.motion_start_offset, "matrix");
    get_if(j, "parallel", out.parallel, "matrix");
    get_if(j, "max_steps", out.max_steps, "matrix");
}

void parse_calibration(const json& j, SweepProtocol& out) {
    expect_keys(j, "calibration", {"n_locations", "descent_start_cm", "descent_speed_cm_s"});
    get_if(j, "n_locations", out.n_locations, "calibration");
    get_if(j, "descent_start_cm", out.descent_start, "calibration");
    get_if(j, "descent_speed_cm_s", out.descent_speed, "calibration");
}

}  // namespace

AppConfig AppConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    expect_keys(j, "(top level)",
                {"sensor", "profile", "profiles", "arm", "environment", "controller", "garments",
                 "motion", "scenario", "matrix", "calibration"});

    AppConfig cfg;
    if (j.contains("sensor")) parse_sensor(j.at("sensor"), cfg.sensor);
    if (j.contains("profile")) get_if(j, "profile", cfg.profile_name, "(top level)");
    if (j.contains("profiles")) parse_profiles(j.at("profiles"), cfg.profiles);
    if (j.contains("arm")) parse_arm(j.at("arm"), cfg.arm);
    if (j.contains("environment")) parse_environment(j.at("environment"), cfg.environment);
    if (j.contains("controller")) parse_controller(j.at("controller"), cfg.controller);
    if (j.contains("garments")) parse_garments(j.at("garments"), cfg.garments);
    if (j.contains("motion")) parse_motion(j.at("motion"), cfg.motion);
    if (j.contains("scenario")) parse_scenario(j.at("scenario"), cfg.scenario, cfg.garment_name);
    if (j.contains("matrix")) parse_matrix(j.at("matrix"), cfg.matrix);
    if (j.contains("calibration")) parse_calibration(j.at("calibration"), cfg.calibration);
    return cfg;
}

void AppConfig::save(const std::string& path) const {
    ordered_json j;
    j["sensor"] = {{"sample_rate_hz", sensor.sample_rate},
                   {"emi_bias", sensor.emi_bias},
                   {"clothing_attenuation", sensor.clothing_attenuation}};
    j["profile"] = profile_name;
    j["profiles"] = ordered_json::array();
    for (const MaterialProfile& p : profiles)
        j["profiles"].push_back({{"name", p.name},
                                 {"alpha_true", p.alpha_true},
                                 {"beta_true", p.beta_true},
                                 {"range_max_cm", p.range_max},
                                 {"noise_sigma", p.noise_sigma}});
    ordered_json contour = ordered_json::array();
    for (const auto& [frac, off] : arm.contour) contour.push_back({frac, off});
    j["arm"] = {{"id", arm.id},
                {"length_cm", arm.length},
                {"fist_height_cm", arm.fist_height},
                {"sensed_surface_offset_cm", arm.sensed_surface_offset},
                {"contour", contour}};
    j["environment"] = {{"stiffness_n_per_cm", environment.stiffness_n_per_cm},
                        {"sensor_overhang_cm", environment.sensor_overhang_cm},
                        {"cloth_thickness_cm", environment.cloth_thickness_cm}};
    j["controller"] = {{"kp", controller.kp},
                       {"kd", controller.kd},
                       {"d_desired_cm", controller.d_desired},
                       {"x_step_cm", controller.x_step},
                       {"control_rate_hz", controller.control_rate},
                       {"force_limit_n", controller.force_limit},
                       {"z_rate_limit_cm_s", controller.z_rate_limit}};
    j["garments"] = ordered_json::array();
    for (const GarmentConfig& g : garments)
        j["garments"].push_back({{"name", g.name},
                                 {"capture_low_cm", g.capture_low},
                                 {"capture_high_cm", g.capture_high},
                                 {"sleeve_length_factor", g.sleeve_length_factor}});
    j["motion"] = {{"kind", motion_kind_name(motion.kind)},
                   {"amplitude_cm", motion.amplitude},
                   {"rate_limit_cm_s", motion.rate_limit},
                   {"period_s", motion.period_s},
                   {"tau_v_s", motion.tau_v},
                   {"sigma_v", motion.sigma_v}};
    j["scenario"] = {{"name", scenario.name},
                     {"start_offset_cm", scenario.start_offset},
                     {"mode", mode_name(scenario.mode)},
                     {"garment", garment_name},
                     {"sleeved", scenario.sleeved},
                     {"start_margin_cm", scenario.start_margin},
                     {"x_extent_cm", scenario.x_extent},
                     {"max_steps", scenario.max_steps}};
    j["matrix"] = {{"n_subjects", matrix.n_subjects},
                   {"reps", matrix.reps},
                   {"start_offsets_cm", matrix.start_offsets},
                   {"include_motion_block", matrix.include_motion_block},
                   {"motion_start_offset_cm", matrix.motion_start_offset},
                   {"parallel", matrix.parallel},
                   {"max_steps", matrix.max_steps}};
    j["calibration"] = {{"n_locations", calibration.n_locations},
                        {"descent_start_cm", calibration.descent_start},
                        {"descent_speed_cm_s", calibration.descent_speed}};
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
    if (!f.good()) throw IoError("write failed: " + path);
}

const MaterialProfile& AppConfig::resolve_profile() const {
    for (const MaterialProfile& p : profiles)
        if (p.name == profile_name) return p;
    throw ConfigError("unknown material profile '" + profile_name + "'");
}

const GarmentConfig& AppConfig::resolve_garment() const {
    for (const GarmentConfig& g : garments)
        if (g.name == garment_name) return g;
    throw ConfigError("unknown garment '" + garment_name + "'");
}

Scenario AppConfig::resolve_scenario() const {
    Scenario sc = scenario;
    sc.garment = resolve_garment();
    sc.motion = motion;
    return sc;
}

void AppConfig::validate() const {
    sensor.validate();
    for (const MaterialProfile& p : profiles) p.validate();
    arm.validate();
    environment.validate();
    controller.validate();
    for (const GarmentConfig& g : garments) g.validate();
    motion.validate();
    resolve_profile();
    resolve_scenario().validate(arm);
    matrix.validate();
    if (calibration.n_locations < 1) throw ConfigError("calibration.n_locations must be >= 1");
    if (calibration.descent_start <= 0.0 || calibration.descent_speed <= 0.0)
        throw ConfigError("calibration descent start and speed must be > 0");
}

}  // namespace caprox
