#pragma once

#include "lagdisc/discovery.hpp"
#include "lagdisc/error.hpp"
#include "lagdisc/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lagdisc {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultSeed = 20240531;

/// Per-benchmark thresholds and prediction settings calibrated on the default ensembles.
struct BenchmarkDefaults {
    double lambda_lagrangian = 1.0;
    double lambda_diffusion = 0.0;
    double rank_tolerance_lagrangian = 0.0;
    double rank_tolerance_diffusion = 0.0;
    double prediction_factor = 2.0;  ///< prediction horizon over training duration
    std::size_t prediction_n_real = 200;
};

BenchmarkDefaults benchmark_defaults(const std::string& name);

/// Overrides for one benchmark run; unset fields take the benchmark defaults.
struct BenchmarkConfig {
    std::string system;
    std::optional<double> dt;
    std::optional<double> t_f;
    std::optional<std::size_t> n_real;
    std::map<std::string, double> params;
    std::optional<double> lambda_lagrangian;
    std::optional<double> lambda_diffusion;
    std::optional<double> rank_tolerance_lagrangian;
    std::optional<double> rank_tolerance_diffusion;
    std::optional<double> prediction_factor;
    std::optional<std::size_t> prediction_n_real;
};

/// Ground truth of a benchmark restricted to the given discovery targets.
struct TruthModel {
    std::vector<std::vector<Term>> particles;  ///< per target, kinetic term first
    std::vector<Term> total;
    std::map<std::size_t, double> gains;
    EquationsOfMotion equations;
    HamiltonianModel hamiltonian;
};

TruthModel true_model(const SystemSpec& spec, const std::vector<std::size_t>& targets);

/// Lagrangian of the whole system (every free coordinate), used for energy conservation.
std::vector<Term> true_full_lagrangian(const SystemSpec& spec);

/// Simulatable system for discovered equations; fields rebuild the benchmark with fitted
/// coefficients, discrete systems evaluate the discovered drift terms.
SystemSpec spec_from_equations(const SystemSpec& truth, const EquationsOfMotion& eom);

struct PredictionSeries {
    std::size_t coord = 0;
    std::string name;
    std::vector<double> t, truth_mean, pred_mean, truth_2sigma, pred_2sigma, abs_error;
};

struct PredictionBundle {
    double training_t_f = 0.0;
    double horizon = 0.0;
    std::size_t n_real = 0;
    bool diverged = false;
    std::string divergence;
    /// 100 * RMS(mean difference) / RMS(truth mean) over (training_t_f, horizon], free coordinates.
    double window_rms_error_pct = 0.0;
    std::vector<PredictionSeries> series;
};

/// Mean and 2-sigma envelopes of truth and discovered systems on shared seeds.
PredictionBundle prediction_comparison(const SystemSpec& truth, const SystemSpec& discovered,
                                       double dt, double training_t_f, double horizon,
                                       std::size_t n_real, std::uint64_t seed,
                                       const std::vector<std::size_t>& probes);

/// H along one realization. With `central_velocity` the interior uses central differences, sample 0
/// the stored initial velocity, and the final sample is omitted.
std::vector<double> hamiltonian_trajectory(const HamiltonianModel& h, const Ensemble& e,
                                           std::size_t realization, bool central_velocity);

struct BenchmarkReport {
    std::string system;
    bool ok = false;
    std::string stage;  ///< failing stage when !ok
    std::optional<ErrorKind> error_kind;
    std::string message;
    double runtime_s = 0.0;  ///< kept out of report.json so reruns are byte-identical
    nlohmann::json json;     ///< versioned report document
    PredictionBundle prediction;
    std::vector<double> hamiltonian_t, hamiltonian_true, hamiltonian_discovered;
};

BenchmarkReport run_benchmark(const BenchmarkConfig& config, std::uint64_t seed);

/// Writes <dir>/<system>/report.json, prediction_<coord>.csv and hamiltonian.csv.
void write_report(const BenchmarkReport& report, const std::filesystem::path& dir);

}  // namespace lagdisc
