#pragma once

#include "lagdisc/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lagdisc {

enum class SystemKind { DiscreteSde, ContinuousSpde };

enum class Boundary {
    None,
    FixedFixed,   ///< u = 0 at both ends
    ClampedFree,  ///< u = u_x = 0 at x = 0, free end at x = L
};

struct SpatialGrid {
    double length = 1.0;
    double dx = 0.01;
    Boundary boundary = Boundary::None;

    std::size_t node_count() const;
    std::vector<double> nodes() const;
};

/// Acceleration a(u) of a mass-normalized second-order system.
using AccelerationFn = std::function<void(std::span<const double> u, std::span<double> a)>;
/// Directional derivative (da/du) * w evaluated at u.
using AccelerationJvpFn = std::function<void(std::span<const double> u,
                                             std::span<const double> w, std::span<double> out)>;

struct SimulationDefaults {
    double dt = 1e-4;
    double t_f = 1.0;
    std::size_t n_real = 200;
};

/**
 * @brief Second-order stochastic system u_tt = a(u) + gain * W_t with additive noise.
 *
 * The first-order state is interleaved (u_0, v_0, u_1, v_1, ...). Coordinates flagged in
 * `fixed` are boundary nodes held at their initial value.
 */
struct SystemSpec {
    std::string name;
    SystemKind kind = SystemKind::DiscreteSde;
    std::size_t dim = 0;
    AccelerationFn acceleration;
    AccelerationJvpFn acceleration_jvp;
    std::vector<double> noise_gain;
    std::vector<bool> fixed;
    std::map<std::string, double> params;
    std::vector<double> initial_displacement;
    std::vector<double> initial_velocity;
    std::optional<SpatialGrid> spatial;
    SimulationDefaults defaults;
    std::vector<std::string> coord_names;

    /// State-derivative map of the interleaved state (deterministic part).
    std::vector<double> drift(std::span<const double> state) const;
    /// Per-coordinate noise gain on the velocity components (constant for additive noise).
    std::vector<double> volatility(std::span<const double> state) const;
    std::vector<double> initial_state() const;
    void validate() const;
};

struct Trajectory {
    std::size_t n_samples = 0;
    std::size_t coords = 0;
    std::vector<double> displacement;  ///< [coord][sample]
    std::vector<double> velocity;

    std::span<const double> u(std::size_t c) const;
    std::span<const double> v(std::size_t c) const;
};

struct Ensemble {
    double dt = 0.0;
    std::size_t n_steps = 0;  ///< samples per trajectory, N_t
    std::size_t n_real = 0;
    std::size_t coords = 0;
    std::vector<double> displacement;  ///< [realization][coord][sample]
    std::vector<double> velocity;
    std::optional<std::vector<double>> spatial_grid;
    std::vector<std::string> coord_names;

    std::size_t offset(std::size_t r, std::size_t c) const { return (r * coords + c) * n_steps; }
    std::span<const double> u(std::size_t r, std::size_t c) const;
    std::span<const double> v(std::size_t r, std::size_t c) const;
    std::span<double> u_mut(std::size_t r, std::size_t c);
    std::span<double> v_mut(std::size_t r, std::size_t c);
    /// Checks shapes and finiteness.
    void validate() const;
};

struct IntegratorOptions {
    double blowup_bound = 1e6;
    std::size_t realization = 0;  ///< reported in divergence errors
};

std::size_t sample_count(double t_f, double dt);

/// Order 1.5 strong Taylor scheme for additive noise.
Trajectory integrate_taylor15(const SystemSpec& spec, double dt, std::size_t n_samples,
                              NoiseStream& noise, const IntegratorOptions& opts = {});

/// Semi-implicit Euler-Maruyama for semi-discretized fields.
Trajectory integrate_euler_maruyama(const SystemSpec& spec, double dt, std::size_t n_samples,
                                    NoiseStream& noise, const IntegratorOptions& opts = {});

/// Integrator matching the system kind; writes into [coord][sample] buffers.
void integrate_into(const SystemSpec& spec, double dt, std::size_t n_samples, NoiseStream& noise,
                    std::span<double> u_out, std::span<double> v_out,
                    const IntegratorOptions& opts);

/// Largest natural frequency of the linearized stiffness, by power iteration.
double max_angular_frequency(const SystemSpec& spec);

/// Throws a stability error when a field system cannot be stepped stably at dt.
void check_stability(const SystemSpec& spec, double dt);

Ensemble generate_ensemble(const SystemSpec& spec, double dt, double t_f, std::size_t n_real,
                           std::uint64_t base_seed, unsigned workers = 0);

/// Pointwise ensemble mean and variance of the displacement, computed without storing paths.
/// Only every `stride`-th sample is kept; `dt` is the spacing of the kept samples.
struct EnsembleMoments {
    double dt = 0.0;
    std::size_t n_steps = 0;
    std::size_t coords = 0;
    std::size_t n_real = 0;
    std::vector<double> mean;      ///< [coord][sample]
    std::vector<double> variance;  ///< [coord][sample]
    bool diverged = false;
    std::string divergence_message;
};

EnsembleMoments ensemble_moments(const SystemSpec& spec, double dt, std::size_t n_samples,
                                 std::size_t n_real, std::uint64_t base_seed,
                                 std::size_t stride = 1, unsigned workers = 0);

/// Scalar SDE dx = f(x) dt + b dW with additive noise.
struct ScalarAdditiveSde {
    std::function<double(double)> drift;
    std::function<double(double)> drift_prime;
    std::function<double(double)> drift_second;
    double gain = 1.0;
};

/// Order 1.5 Taylor path driven by given increments dW and dZ = int int dW ds.
std::vector<double> taylor15_scalar_path(const ScalarAdditiveSde& sde, double x0, double dt,
                                         std::span<const double> dW, std::span<const double> dZ);
std::vector<double> euler_maruyama_scalar_path(const ScalarAdditiveSde& sde, double x0, double dt,
                                               std::span<const double> dW);

}  // namespace lagdisc
