#pragma once

#include <string>
#include <vector>

#include "caprox/harness.hpp"

namespace caprox {

// Whole-application configuration: one structured document covering sensor,
// material profiles, arm, environment, controller, garments, motion, the
// single-trial scenario, the evaluation matrix, and the calibration protocol.
// Every field has a default, so a config file only needs the overrides; CLI
// flags are applied on top by the tools.
struct AppConfig {
    SensorConfig sensor;
    std::string profile_name = "human_arm";
    std::vector<MaterialProfile> profiles = {human_arm_profile(), gown_on_table_profile()};
    ArmModel arm;
    EnvironmentConfig environment;
    ControllerConfig controller;
    std::vector<GarmentConfig> garments = {GarmentConfig::gown(), GarmentConfig::cardigan()};
    MotionProfile motion;  // kind + parameters used when the scenario enables motion
    Scenario scenario;     // garment/motion members are overwritten by resolve_scenario()
    std::string garment_name = "gown";
    MatrixConfig matrix;
    SweepProtocol calibration;

    static AppConfig load(const std::string& path);  // merges the file over defaults
    void save(const std::string& path) const;        // full document, all fields explicit

    const MaterialProfile& resolve_profile() const;  // profile_name lookup
    const GarmentConfig& resolve_garment() const;    // garment_name lookup
    Scenario resolve_scenario() const;  // scenario with motion and garment attached

    void validate() const;
};

}  // namespace caprox
