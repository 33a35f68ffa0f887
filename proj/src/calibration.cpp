#include "caprox/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "caprox/errors.hpp"

namespace caprox {
namespace {

double median(std::vector<double> v) {
    std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    return 0.5 * (v[mid - 1] + hi);
}

struct InRange {
    std::vector<double> dc, d;
};

InRange in_range_samples(const SweepDataset& data, double range_max) {
    InRange out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.distance[i] <= range_max) {
            out.dc.push_back(data.delta_c[i]);
            out.d.push_back(data.distance[i]);
        }
    }
    return out;
}

double sum_sq_residual(const std::vector<double>& dc, const std::vector<double>& d, double alpha,
                       double beta) {
    double s = 0.0;
    for (std::size_t i = 0; i < dc.size(); ++i) {
        double r = d[i] - alpha / (dc[i] + beta);
        s += r * r;
    }
    return s;
}

}  // namespace

void SweepDataset::append(const SweepDataset& other) {
    t.insert(t.end(), other.t.begin(), other.t.end());
    location_x.insert(location_x.end(), other.location_x.begin(), other.location_x.end());
    delta_c.insert(delta_c.end(), other.delta_c.begin(), other.delta_c.end());
    distance.insert(distance.end(), other.distance.begin(), other.distance.end());
}

SweepDataset run_calibration_sweep(const ArmModel& arm, const MaterialProfile& profile,
                                   const SensorConfig& config, int n_locations, Rng& rng,
                                   double descent_start, double descent_speed) {
    if (n_locations < 1) throw PreconditionError("run_calibration_sweep: n_locations must be >= 1");
    if (arm.length <= 0.0) throw PreconditionError("run_calibration_sweep: arm length must be > 0");
    if (descent_start <= 0.0 || descent_speed <= 0.0)
        throw ConfigError("sweep descent start and speed must be > 0");
    profile.validate();
    config.validate();

    SweepDataset out;
    out.subject_id = arm.id;
    double step = descent_speed / config.sample_rate;  // cm per sample
    auto n_steps = static_cast<long>(std::llround(descent_start / step));
    double t = 0.0;
    for (int loc = 0; loc < n_locations; ++loc) {
        double x = n_locations == 1 ? arm.length / 2.0
                                    : arm.length * loc / (n_locations - 1.0);
        for (long k = 0; k < n_steps; ++k) {
            double d = descent_start - static_cast<double>(k) * step;  // true gap to the surface
            double d_sensed = std::max(d - arm.sensed_surface_offset, 1e-6);
            DeltaCSample s = forward_delta_c(d_sensed, profile, config, rng, t);
            out.t.push_back(t);
            out.location_x.push_back(x);
            out.delta_c.push_back(s.delta_c);
            out.distance.push_back(d);
            t += 1.0 / config.sample_rate;
        }
    }
    return out;
}

CalibrationModel fit_model(const SweepDataset& data, double range_max) {
    InRange s = in_range_samples(data, range_max);
    const std::size_t n = s.dc.size();
    if (n < 3) throw FitError("need at least 3 in-range samples");
    for (double d : s.d)
        if (d <= 0.0) throw FitError("distances must be > 0");
    double dc_min = *std::min_element(s.dc.begin(), s.dc.end());
    double dc_max = *std::max_element(s.dc.begin(), s.dc.end());
    if (dc_max - dc_min <= 0.0) throw FitError("zero variance in delta_c");

    constexpr double kAlphaMin = 1e-12, kAlphaMax = 1e6;
    constexpr double kBetaMin = 0.0, kBetaMax = 1e4;

    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = s.d[i] * s.dc[i];
    double alpha = std::clamp(median(std::move(prod)), kAlphaMin, kAlphaMax);
    double beta = 1.0;

    // Damped Gauss-Newton on r_i = d_i - alpha/(dc_i + beta); the 2x2 normal
    // equations are solved in closed form, with the damping term scaled by the
    // Hessian diagonal (Levenberg-Marquardt style) and steps clamped to the
    // bounds.
    double cost = sum_sq_residual(s.dc, s.d, alpha, beta);
    double lambda = 1e-3;
    bool converged = false;
    for (int iter = 0; iter < 200 && !converged; ++iter) {
        double haa = 0, hab = 0, hbb = 0, ga = 0, gb = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double den = s.dc[i] + beta;
            double r = s.d[i] - alpha / den;
            double ja = -1.0 / den;           // d r / d alpha
            double jb = alpha / (den * den);  // d r / d beta
            haa += ja * ja;
            hab += ja * jb;
            hbb += jb * jb;
            ga += ja * r;
            gb += jb * r;
        }
        bool improved = false;
        for (int tries = 0; tries < 60; ++tries) {
            double a11 = haa * (1.0 + lambda);
            double a22 = hbb * (1.0 + lambda);
            double det = a11 * a22 - hab * hab;
            if (std::abs(det) < 1e-300) {
                lambda *= 10.0;
                continue;
            }
            double da = (-ga * a22 + gb * hab) / det;
            double db = (-gb * a11 + ga * hab) / det;
            double alpha2 = std::clamp(alpha + da, kAlphaMin, kAlphaMax);
            double beta2 = std::clamp(beta + db, kBetaMin, kBetaMax);
            double cost2 = sum_sq_residual(s.dc, s.d, alpha2, beta2);
            if (cost2 <= cost) {
                if (cost - cost2 <= 1e-14 * (cost + 1e-30)) converged = true;
                alpha = alpha2;
                beta = beta2;
                cost = cost2;
                lambda = std::max(lambda * 0.3, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        if (!improved) converged = true;  // damping exhausted at a local minimum
    }
    if (!converged) throw FitError("no convergence within iteration budget", cost);

    double mean_d = 0.0;
    for (double d : s.d) mean_d += d;
    mean_d /= static_cast<double>(n);
    double ss_tot = 0.0;
    for (double d : s.d) ss_tot += (d - mean_d) * (d - mean_d);
    if (ss_tot <= 0.0) throw FitError("zero variance in distance");

    CalibrationModel m;
    m.alpha = alpha;
    m.beta = beta;
    m.r_squared = 1.0 - cost / ss_tot;
    m.n_samples = static_cast<long>(n);
    return m;
}

FitEval evaluate_fit(const CalibrationModel& model, const SweepDataset& data, double range_max) {
    if (!model.fitted()) throw ConfigError("evaluate_fit: model not fitted");
    InRange s = in_range_samples(data, range_max);
    if (s.d.empty()) throw PreconditionError("evaluate_fit: no in-range samples");
    FitEval out;
    out.n_samples = static_cast<long>(s.d.size());
    out.residuals.reserve(s.d.size());
    double mean_d = 0.0;
    for (double d : s.d) mean_d += d;
    mean_d /= static_cast<double>(s.d.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < s.d.size(); ++i) {
        double r = s.d[i] - model.alpha / (s.dc[i] + model.beta);
        out.residuals.push_back(r);
        ss_res += r * r;
        ss_tot += (s.d[i] - mean_d) * (s.d[i] - mean_d);
    }
    out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return out;
}

SeparationReport discriminate_material(const SweepDataset& a, const SweepDataset& b) {
    if (a.size() == 0 || b.size() == 0)
        throw PreconditionError("discriminate_material: empty sweep");
    constexpr double kBinWidth = 0.5;
    constexpr int kBins = 20;  // (0, 10) cm
    struct Acc {
        double sum = 0, sum_sq = 0;
        long n = 0;
        void add(double v) { sum += v; sum_sq += v * v; ++n; }
        double mean() const { return sum / static_cast<double>(n); }
        double stdev() const {
            if (n < 2) return 0.0;
            double m = mean();
            return std::sqrt(std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) /
                                               static_cast<double>(n - 1)));
        }
    };
    std::array<Acc, kBins> acc_a{}, acc_b{};
    auto fill = [&](const SweepDataset& ds, std::array<Acc, kBins>& acc) {
        for (std::size_t i = 0; i < ds.size(); ++i) {
            double d = ds.distance[i];
            if (d <= 0.0 || d >= kBins * kBinWidth) continue;
            acc[static_cast<int>(d / kBinWidth)].add(ds.delta_c[i]);
        }
    };
    fill(a, acc_a);
    fill(b, acc_b);

    SeparationReport rep;
    int loaded = 0, separated = 0;
    for (int i = 0; i < kBins; ++i) {
        SeparationBin bin;
        bin.d_lo = i * kBinWidth;
        bin.d_hi = (i + 1) * kBinWidth;
        bin.loaded = acc_a[i].n >= 2 && acc_b[i].n >= 2;
        if (bin.loaded) {
            bin.mean_a = acc_a[i].mean();
            bin.mean_b = acc_b[i].mean();
            double pooled = acc_a[i].stdev() + acc_b[i].stdev();
            double gap = std::abs(bin.mean_a - bin.mean_b);
            bin.gap_sigmas = pooled > 0.0 ? gap / pooled : (gap > 0.0 ? 1e9 : 0.0);
            ++loaded;
            if (bin.gap_sigmas > 3.0) ++separated;
        }
        rep.bins.push_back(bin);
    }
    if (loaded == 0)
        throw PreconditionError("discriminate_material: sweeps share no distance support");
    rep.distinguishable = separated * 2 > loaded;
    return rep;
}

void save_sweep_csv(const SweepDataset& data, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "t_s,location_x_cm,delta_c,distance_cm,subject_id\n";
    char line[160];
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,%.6f,%s\n", data.t[i],
                      data.location_x[i], data.delta_c[i], data.distance[i],
                      data.subject_id.c_str());
        f << line;
    }
    if (!f.good()) throw IoError("write failed: " + path);
}

SweepDataset load_sweep_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("t_s,location_x_cm,delta_c,distance_cm", 0) != 0)
        throw IoError("not a sweep CSV (bad header): " + path);
    SweepDataset out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        double vals[4];
        for (double& v : vals) {
            if (!std::getline(ss, cell, ',')) throw IoError("short row in " + path);
            v = std::stod(cell);
        }
        if (std::getline(ss, cell, ',')) out.subject_id = cell;
        out.t.push_back(vals[0]);
        out.location_x.push_back(vals[1]);
        out.delta_c.push_back(vals[2]);
        out.distance.push_back(vals[3]);
    }
    return out;
}

void save_model(const CalibrationModel& model, const std::string& path) {
    nlohmann::ordered_json j;
    j["alpha"] = model.alpha;
    j["beta"] = model.beta;
    j["r_squared"] = model.r_squared;
    j["n_samples"] = model.n_samples;
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
    if (!f.good()) throw IoError("write failed: " + path);
}

CalibrationModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad model file " + path + ": " + e.what());
    }
    CalibrationModel m;
    try {
        m.alpha = j.at("alpha").get<double>();
        m.beta = j.at("beta").get<double>();
        m.r_squared = j.at("r_squared").get<double>();
        m.n_samples = j.at("n_samples").get<long>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad model file " + path + ": " + e.what());
    }
    if (!m.fitted()) throw ConfigError("model file has alpha <= 0: " + path);
    return m;
}

}  // namespace caprox
