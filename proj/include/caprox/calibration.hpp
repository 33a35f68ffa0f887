#pragma once

#include <string>
#include <vector>

#include "caprox/environment.hpp"
#include "caprox/random.hpp"
#include "caprox/sensor_model.hpp"

namespace caprox {

// (delta_c, distance) pairs from controlled descents, column-wise. Distances
// are true sensor-to-surface gaps; location_x records which arm position each
// sample came from.
struct SweepDataset {
    std::vector<double> t;           // seconds, cumulative over the sweep
    std::vector<double> location_x;  // cm along the arm
    std::vector<double> delta_c;     // counts
    std::vector<double> distance;    // cm, in (0, 15]
    std::string subject_id = "default";

    std::size_t size() const { return delta_c.size(); }
    void append(const SweepDataset& other);
};

struct SweepProtocol {
    int n_locations = 6;
    double descent_start = 15.0;  // cm above the surface
    double descent_speed = 1.0;   // cm/s downward
};

// Descends at each of n equally spaced locations (fist to shoulder inclusive),
// sampling at config.sample_rate until just above contact. Defaults give
// 1500 samples per location.
SweepDataset run_calibration_sweep(const ArmModel& arm, const MaterialProfile& profile,
                                   const SensorConfig& config, int n_locations, Rng& rng,
                                   double descent_start = 15.0, double descent_speed = 1.0);

// Least-squares fit of d = alpha/(delta_c + beta) in distance space over
// in-range samples (d <= range). Damped Gauss-Newton with diagonal scaling,
// bounds alpha in (0, 1e6], beta in [0, 1e4], start alpha0 = median(d*dc),
// beta0 = 1. Throws FitError on degenerate data or non-convergence.
CalibrationModel fit_model(const SweepDataset& data, double range_max = kDefaultRangeMaxCm);

struct FitEval {
    double r_squared = 0.0;
    std::vector<double> residuals;  // d_i - alpha/(dc_i + beta), in-range samples
    long n_samples = 0;
};

// R^2 of the model's distance predictions against the dataset (in-range
// samples only). Evaluating a model on its own training data reproduces
// model.r_squared.
FitEval evaluate_fit(const CalibrationModel& model, const SweepDataset& data,
                     double range_max = kDefaultRangeMaxCm);

struct SeparationBin {
    double d_lo = 0.0, d_hi = 0.0;
    double mean_a = 0.0, mean_b = 0.0;
    double gap_sigmas = 0.0;  // |mean_a - mean_b| / (std_a + std_b)
    bool loaded = false;      // both sweeps populate the bin
};

struct SeparationReport {
    std::vector<SeparationBin> bins;
    bool distinguishable = false;  // gap > 3 sigma in a majority of loaded bins
};

// Compares mean delta-C per distance bin (0.5 cm bins below 10 cm) between
// two sweeps. Errors if the sweeps share no distance support.
SeparationReport discriminate_material(const SweepDataset& a, const SweepDataset& b);

// CSV with header t_s,location_x_cm,delta_c,distance_cm,subject_id.
void save_sweep_csv(const SweepDataset& data, const std::string& path);
SweepDataset load_sweep_csv(const std::string& path);

// Small JSON document with fields alpha, beta, r_squared, n_samples.
void save_model(const CalibrationModel& model, const std::string& path);
CalibrationModel load_model(const std::string& path);

}  // namespace caprox
