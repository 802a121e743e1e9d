#include "lagdisc/sim.hpp"

#include "lagdisc/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace lagdisc {

std::size_t SpatialGrid::node_count() const {
    return static_cast<std::size_t>(std::llround(length / dx)) + 1;
}

std::vector<double> SpatialGrid::nodes() const {
    std::vector<double> x(node_count());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) * dx;
    return x;
}

std::vector<double> SystemSpec::drift(std::span<const double> state) const {
    require(state.size() == 2 * dim, ErrorKind::InvalidArgument, "state length must be 2*dim");
    std::vector<double> u(dim), a(dim), out(2 * dim);
    for (std::size_t i = 0; i < dim; ++i) u[i] = state[2 * i];
    acceleration(u, a);
    for (std::size_t i = 0; i < dim; ++i) {
        const bool pinned = !fixed.empty() && fixed[i];
        out[2 * i] = pinned ? 0.0 : state[2 * i + 1];
        out[2 * i + 1] = pinned ? 0.0 : a[i];
    }
    return out;
}

std::vector<double> SystemSpec::volatility(std::span<const double> state) const {
    require(state.size() == 2 * dim, ErrorKind::InvalidArgument, "state length must be 2*dim");
    return noise_gain;
}

std::vector<double> SystemSpec::initial_state() const {
    std::vector<double> s(2 * dim);
    for (std::size_t i = 0; i < dim; ++i) {
        s[2 * i] = initial_displacement[i];
        s[2 * i + 1] = initial_velocity[i];
    }
    return s;
}

void SystemSpec::validate() const {
    require(dim >= 1, ErrorKind::Config, "system dimension must be at least 1");
    require(static_cast<bool>(acceleration), ErrorKind::Config, "system has no drift");
    require(noise_gain.size() == dim && initial_displacement.size() == dim &&
                initial_velocity.size() == dim && (fixed.empty() || fixed.size() == dim),
            ErrorKind::Config, fmt::format("system '{}' has inconsistent vector sizes", name));
    for (double g : noise_gain)
        require(std::isfinite(g), ErrorKind::Config, "noise gain must be finite");
    if (kind == SystemKind::ContinuousSpde) {
        require(spatial.has_value(), ErrorKind::Config, "field system needs a spatial grid");
        require(spatial->node_count() == dim, ErrorKind::Config,
                "field dimension must equal round(L/dx)+1");
        require(!fixed.empty(), ErrorKind::Config, "field system needs boundary flags");
        for (std::size_t i = 0; i < dim; ++i)
            if (fixed[i])
                require(noise_gain[i] == 0.0, ErrorKind::Config,
                        "boundary nodes cannot carry noise");
        if (spatial->boundary == Boundary::FixedFixed)
            require(fixed.front() && fixed.back(), ErrorKind::Config,
                    "fixed-fixed field must pin both end nodes");
        if (spatial->boundary == Boundary::ClampedFree)
            require(fixed.front() && !fixed.back(), ErrorKind::Config,
                    "clamped-free field must pin only the first node");
    }
    if (coord_names.size() != 0)
        require(coord_names.size() == dim, ErrorKind::Config, "coordinate name count mismatch");
}

std::span<const double> Trajectory::u(std::size_t c) const {
    return {displacement.data() + c * n_samples, n_samples};
}
std::span<const double> Trajectory::v(std::size_t c) const {
    return {velocity.data() + c * n_samples, n_samples};
}

std::span<const double> Ensemble::u(std::size_t r, std::size_t c) const {
    return {displacement.data() + offset(r, c), n_steps};
}
std::span<const double> Ensemble::v(std::size_t r, std::size_t c) const {
    return {velocity.data() + offset(r, c), n_steps};
}
std::span<double> Ensemble::u_mut(std::size_t r, std::size_t c) {
    return {displacement.data() + offset(r, c), n_steps};
}
std::span<double> Ensemble::v_mut(std::size_t r, std::size_t c) {
    return {velocity.data() + offset(r, c), n_steps};
}

void Ensemble::validate() const {
    require(dt > 0.0, ErrorKind::Schema, "ensemble dt must be positive");
    require(n_steps >= 3 && n_real >= 1 && coords >= 1, ErrorKind::Schema,
            "ensemble shape must be at least 1 x 1 x 3");
    const std::size_t total = n_real * coords * n_steps;
    require(displacement.size() == total && velocity.size() == total, ErrorKind::Schema,
            "ensemble arrays do not match (N, n, N_t)");
    for (std::size_t k = 0; k < total; ++k)
        require(std::isfinite(displacement[k]) && std::isfinite(velocity[k]), ErrorKind::Schema,
                "ensemble contains non-finite samples");
    if (spatial_grid)
        require(spatial_grid->size() == coords, ErrorKind::Schema, "spatial grid length mismatch");
}

std::size_t sample_count(double t_f, double dt) {
    require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "dt must be positive");
    require(t_f > 0.0 && std::isfinite(t_f), ErrorKind::InvalidArgument, "t_f must be positive");
    return static_cast<std::size_t>(std::llround(t_f / dt)) + 1;
}

namespace {

bool is_fixed(const SystemSpec& spec, std::size_t i) { return !spec.fixed.empty() && spec.fixed[i]; }

void check_bound(std::span<const double> u, std::span<const double> v, std::size_t step,
                 const IntegratorOptions& opts) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::max(std::abs(u[i]), std::abs(v[i]));
        if (!(a <= m)) m = a;  // also catches NaN
    }
    if (!(m <= opts.blowup_bound)) throw DivergenceError(step, opts.realization, m);
}

void taylor_into(const SystemSpec& spec, double dt, std::size_t n_samples, NoiseStream& noise,
                 std::span<double> u_out, std::span<double> v_out, const IntegratorOptions& opts) {
    const std::size_t n = spec.dim;
    std::vector<double> u(spec.initial_displacement), v(spec.initial_velocity), a(n), jv(n);
    const double h = dt, h2 = dt * dt, sqh = std::sqrt(dt), h32 = dt * sqh;
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    for (std::size_t step = 0;; ++step) {
        for (std::size_t i = 0; i < n; ++i) {
            u_out[i * n_samples + step] = u[i];
            v_out[i * n_samples + step] = v[i];
        }
        if (step + 1 == n_samples) break;
        spec.acceleration(u, a);
        spec.acceleration_jvp(u, v, jv);
        for (std::size_t i = 0; i < n; ++i) {
            if (is_fixed(spec, i)) continue;
            double dW = 0.0, dZ = 0.0;
            if (spec.noise_gain[i] != 0.0) {
                const double u1 = noise.standard_normal();
                const double u2 = noise.standard_normal();
                dW = u1 * sqh;
                dZ = 0.5 * h32 * (u1 + u2 * inv_sqrt3);
            }
            const double g = spec.noise_gain[i];
            const double un = u[i] + v[i] * h + 0.5 * a[i] * h2 + g * dZ;
            v[i] = v[i] + a[i] * h + 0.5 * jv[i] * h2 + g * dW;
            u[i] = un;
        }
        check_bound(u, v, step + 1, opts);
    }
}

void euler_maruyama_into(const SystemSpec& spec, double dt, std::size_t n_samples,
                         NoiseStream& noise, std::span<double> u_out, std::span<double> v_out,
                         const IntegratorOptions& opts) {
    const std::size_t n = spec.dim;
    std::vector<double> u(spec.initial_displacement), v(spec.initial_velocity), a(n);
    const double sqh = std::sqrt(dt);
    for (std::size_t step = 0;; ++step) {
        for (std::size_t i = 0; i < n; ++i) {
            u_out[i * n_samples + step] = u[i];
            v_out[i * n_samples + step] = v[i];
        }
        if (step + 1 == n_samples) break;
        spec.acceleration(u, a);
        for (std::size_t i = 0; i < n; ++i) {
            if (is_fixed(spec, i)) continue;
            double dW = 0.0;
            if (spec.noise_gain[i] != 0.0) dW = noise.standard_normal() * sqh;
            v[i] += a[i] * dt + spec.noise_gain[i] * dW;
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!is_fixed(spec, i)) u[i] += v[i] * dt;
        check_bound(u, v, step + 1, opts);
    }
}

Trajectory make_trajectory(const SystemSpec& spec, std::size_t n_samples) {
    require(n_samples >= 1, ErrorKind::InvalidArgument, "need at least one sample");
    Trajectory t;
    t.n_samples = n_samples;
    t.coords = spec.dim;
    t.displacement.resize(spec.dim * n_samples);
    t.velocity.resize(spec.dim * n_samples);
    return t;
}

}  // namespace

Trajectory integrate_taylor15(const SystemSpec& spec, double dt, std::size_t n_samples,
                              NoiseStream& noise, const IntegratorOptions& opts) {
    spec.validate();
    require(spec.kind == SystemKind::DiscreteSde, ErrorKind::InvalidArgument,
            "Taylor 1.5 integrator expects a discrete SDE");
    require(static_cast<bool>(spec.acceleration_jvp), ErrorKind::Config,
            "Taylor 1.5 integrator needs the drift Jacobian");
    require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
    auto t = make_trajectory(spec, n_samples);
    taylor_into(spec, dt, n_samples, noise, t.displacement, t.velocity, opts);
    return t;
}

Trajectory integrate_euler_maruyama(const SystemSpec& spec, double dt, std::size_t n_samples,
                                    NoiseStream& noise, const IntegratorOptions& opts) {
    spec.validate();
    require(spec.kind == SystemKind::ContinuousSpde, ErrorKind::InvalidArgument,
            "Euler-Maruyama field integrator expects a field system");
    check_stability(spec, dt);
    auto t = make_trajectory(spec, n_samples);
    euler_maruyama_into(spec, dt, n_samples, noise, t.displacement, t.velocity, opts);
    return t;
}

void integrate_into(const SystemSpec& spec, double dt, std::size_t n_samples, NoiseStream& noise,
                    std::span<double> u_out, std::span<double> v_out,
                    const IntegratorOptions& opts) {
    require(u_out.size() == spec.dim * n_samples && v_out.size() == spec.dim * n_samples,
            ErrorKind::InvalidArgument, "output buffer size mismatch");
    if (spec.kind == SystemKind::DiscreteSde)
        taylor_into(spec, dt, n_samples, noise, u_out, v_out, opts);
    else
        euler_maruyama_into(spec, dt, n_samples, noise, u_out, v_out, opts);
}

double max_angular_frequency(const SystemSpec& spec) {
    require(static_cast<bool>(spec.acceleration_jvp), ErrorKind::Config,
            "stability check needs the drift Jacobian");
    const std::size_t n = spec.dim;
    std::vector<double> zero(n, 0.0), w(n), y(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = is_fixed(spec, i) ? 0.0 : ((i % 2) ? -1.0 : 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (double& x : w) x /= norm;
        spec.acceleration_jvp(zero, w, y);
        double rq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_fixed(spec, i)) y[i] = 0.0;
            rq -= w[i] * y[i];
        }
        lambda = std::max(lambda, rq);
        for (std::size_t i = 0; i < n; ++i) w[i] = -y[i];
    }
    return std::sqrt(std::max(lambda, 0.0));
}

void check_stability(const SystemSpec& spec, double dt) {
    require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "dt must be positive");
    if (spec.kind != SystemKind::ContinuousSpde) return;
    const double omega = max_angular_frequency(spec);
    if (omega * dt > 2.0) {
        std::string detail;
        if (auto it = spec.params.find("c"); it != spec.params.end() && spec.spatial &&
                                               spec.spatial->boundary == Boundary::FixedFixed)
            detail = fmt::format(" (c*dt/dx = {:.4g} > 1)", it->second * dt / spec.spatial->dx);
        fail(ErrorKind::Stability,
             fmt::format("time step {:.3g} s is unstable for '{}': omega_max*dt = {:.4g} > 2{}",
                         dt, spec.name, omega * dt, detail));
    }
}

Ensemble generate_ensemble(const SystemSpec& spec, double dt, double t_f, std::size_t n_real,
                           std::uint64_t base_seed, unsigned workers) {
    spec.validate();
    require(n_real >= 1, ErrorKind::InvalidArgument, "need at least one realization");
    const std::size_t n_samples = sample_count(t_f, dt);
    check_stability(spec, dt);
    if (spec.kind == SystemKind::DiscreteSde)
        require(static_cast<bool>(spec.acceleration_jvp), ErrorKind::Config,
                "Taylor 1.5 integrator needs the drift Jacobian");

    Ensemble e;
    e.dt = dt;
    e.n_steps = n_samples;
    e.n_real = n_real;
    e.coords = spec.dim;
    e.coord_names = spec.coord_names;
    if (spec.spatial) e.spatial_grid = spec.spatial->nodes();
    const std::size_t total = n_real * spec.dim * n_samples;
    e.displacement.resize(total);
    e.velocity.resize(total);

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_real));

    const std::size_t block = spec.dim * n_samples;
    auto run = [&](std::size_t r) {
        NoiseStream noise(derive_seed(base_seed, r));
        IntegratorOptions opts;
        opts.realization = r;
        integrate_into(spec, dt, n_samples, noise,
                       std::span<double>(e.displacement.data() + r * block, block),
                       std::span<double>(e.velocity.data() + r * block, block), opts);
    };
    if (workers <= 1) {
        for (std::size_t r = 0; r < n_real; ++r) run(r);
        return e;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t r = w; r < n_real; r += workers) run(r);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    // Report the divergence with the lowest realization index for determinism.
    std::exception_ptr first;
    std::size_t first_r = n_real;
    for (auto& ep : errors) {
        if (!ep) continue;
        try {
            std::rethrow_exception(ep);
        } catch (const DivergenceError& d) {
            if (d.realization() < first_r) {
                first_r = d.realization();
                first = ep;
            }
        } catch (...) {
            if (!first) first = ep;
        }
    }
    if (first) std::rethrow_exception(first);
    return e;
}

EnsembleMoments ensemble_moments(const SystemSpec& spec, double dt, std::size_t n_samples,
                                 std::size_t n_real, std::uint64_t base_seed, std::size_t stride,
                                 unsigned workers) {
    spec.validate();
    require(n_real >= 1 && n_samples >= 1 && stride >= 1, ErrorKind::InvalidArgument,
            "moments need at least one realization, sample and stride");
    check_stability(spec, dt);
    const std::size_t kept = (n_samples - 1) / stride + 1;
    const std::size_t block = spec.dim * kept;

    // Fixed realization chunks merged in order keep the result independent of the worker count.
    struct Partial {
        std::size_t count = 0;
        std::vector<double> mean, m2;
        std::size_t failed_at = std::numeric_limits<std::size_t>::max();
        std::string message;
    };
    const std::size_t chunks = std::min<std::size_t>(n_real, 8);
    std::vector<Partial> parts(chunks);
    auto run_chunk = [&](std::size_t c) {
        Partial& p = parts[c];
        p.mean.assign(block, 0.0);
        p.m2.assign(block, 0.0);
        std::vector<double> u(spec.dim * n_samples), v(spec.dim * n_samples);
        for (std::size_t r = c * n_real / chunks; r < (c + 1) * n_real / chunks; ++r) {
            NoiseStream noise(derive_seed(base_seed, r));
            IntegratorOptions opts;
            opts.realization = r;
            try {
                integrate_into(spec, dt, n_samples, noise, u, v, opts);
            } catch (const DivergenceError& d) {
                p.failed_at = r;
                p.message = d.what();
                return;
            }
            ++p.count;
            const double inv = 1.0 / static_cast<double>(p.count);
            for (std::size_t q = 0; q < spec.dim; ++q)
                for (std::size_t k = 0; k < kept; ++k) {
                    const double x = u[q * n_samples + k * stride];
                    const std::size_t i = q * kept + k;
                    const double delta = x - p.mean[i];
                    p.mean[i] += delta * inv;
                    p.m2[i] += delta * (x - p.mean[i]);
                }
        }
    };
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);

    EnsembleMoments m;
    m.dt = dt * static_cast<double>(stride);
    m.n_steps = kept;
    m.coords = spec.dim;
    m.mean.assign(block, 0.0);
    std::vector<double> m2(block, 0.0);
    std::size_t n = 0;
    for (const auto& p : parts) {
        if (p.failed_at != std::numeric_limits<std::size_t>::max() && !m.diverged) {
            m.diverged = true;
            m.divergence_message = p.message;
        }
        if (p.count == 0) continue;
        const double na = static_cast<double>(n), nb = static_cast<double>(p.count);
        const double nt = na + nb;
        for (std::size_t i = 0; i < block; ++i) {
            const double delta = p.mean[i] - m.mean[i];
            m.mean[i] += delta * nb / nt;
            m2[i] += p.m2[i] + delta * delta * na * nb / nt;
        }
        n += p.count;
    }
    m.n_real = n;
    m.variance.assign(block, 0.0);
    if (n > 1)
        for (std::size_t i = 0; i < block; ++i) m.variance[i] = m2[i] / static_cast<double>(n - 1);
    return m;
}

std::vector<double> taylor15_scalar_path(const ScalarAdditiveSde& sde, double x0, double dt,
                                         std::span<const double> dW, std::span<const double> dZ) {
    require(dW.size() == dZ.size(), ErrorKind::InvalidArgument, "increment length mismatch");
    std::vector<double> x(dW.size() + 1);
    x[0] = x0;
    const double b = sde.gain;
    for (std::size_t k = 0; k < dW.size(); ++k) {
        const double f = sde.drift(x[k]), fp = sde.drift_prime(x[k]), fpp = sde.drift_second(x[k]);
        x[k + 1] = x[k] + f * dt + b * dW[k] + b * fp * dZ[k] +
                   0.5 * (f * fp + 0.5 * b * b * fpp) * dt * dt;
    }
    return x;
}

std::vector<double> euler_maruyama_scalar_path(const ScalarAdditiveSde& sde, double x0, double dt,
                                               std::span<const double> dW) {
    std::vector<double> x(dW.size() + 1);
    x[0] = x0;
    for (std::size_t k = 0; k < dW.size(); ++k)
        x[k + 1] = x[k] + sde.drift(x[k]) * dt + sde.gain * dW[k];
    return x;
}

}  // namespace lagdisc
