#include "lagdisc/benchmarks.hpp"

#include "lagdisc/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace lagdisc {

const std::vector<std::string>& benchmark_names() {
    static const std::vector<std::string> names{"harmonic", "pendulum", "duffing",
                                                "3dof",     "wave",     "beam"};
    return names;
}

std::map<std::string, double> benchmark_default_params(const std::string& name) {
    if (name == "harmonic") return {{"m", 1.0}, {"k", 1000.0}, {"sigma", 1.0}, {"x0", 0.5}};
    if (name == "pendulum") return {{"g", 9.81}, {"l", 1.0}, {"sigma", 0.1}, {"theta0", 0.9}};
    if (name == "duffing")
        return {{"m", 1.0}, {"k", 1000.0}, {"alpha", 5000.0}, {"sigma", 1.0}, {"x0", 0.4}};
    if (name == "3dof")
        return {{"m", 10.0}, {"k", 10000.0}, {"sigma", 1.0}, {"x1", 0.25}, {"x2", 0.5}, {"x3", 0.0}};
    if (name == "wave") return {{"c", 2.0}, {"sigma", 2.0}, {"L", 1.0}, {"dx", 0.01}};
    if (name == "beam")
        return {{"E", 2e10},    {"b", 0.02},  {"h", 0.001},           {"rho", 8050.0},
                {"sigma", 20.0}, {"L", 1.0},  {"dx", 0.01},
                {"psi", 0.596864 * std::numbers::pi}};
    std::string list;
    for (const auto& n : benchmark_names()) list += (list.empty() ? "" : ", ") + n;
    fail(ErrorKind::Lookup, fmt::format("unknown system '{}'; valid names: {}", name, list));
}

double cantilever_mode(double x, double psi, double length) {
    const double pl = psi * length;
    const double ratio = (std::cos(pl) + std::cosh(pl)) / (std::sin(pl) + std::sinh(pl));
    return (std::cosh(psi * x) - std::cos(psi * x)) +
           ratio * (std::sin(psi * x) - std::sinh(psi * x));
}

namespace {

std::map<std::string, double> merged(const std::string& name,
                                     const std::map<std::string, double>& overrides) {
    auto p = benchmark_default_params(name);
    for (const auto& [k, v] : overrides) {
        auto it = p.find(k);
        require(it != p.end(), ErrorKind::Config,
                fmt::format("unknown parameter '{}' for system '{}'", k, name));
        require(std::isfinite(v), ErrorKind::Config, fmt::format("parameter '{}' is not finite", k));
        it->second = v;
    }
    return p;
}

SystemSpec harmonic(const std::map<std::string, double>& p) {
    SystemSpec s;
    s.name = "harmonic";
    s.dim = 1;
    const double w2 = p.at("k") / p.at("m");
    s.acceleration = [w2](std::span<const double> u, std::span<double> a) { a[0] = -w2 * u[0]; };
    s.acceleration_jvp = [w2](std::span<const double>, std::span<const double> w,
                              std::span<double> out) { out[0] = -w2 * w[0]; };
    s.noise_gain = {p.at("sigma") / p.at("m")};
    s.initial_displacement = {p.at("x0")};
    s.initial_velocity = {0.0};
    s.defaults = {1e-4, 1.0, 200};
    s.coord_names = {"X"};
    return s;
}

SystemSpec pendulum(const std::map<std::string, double>& p) {
    SystemSpec s;
    s.name = "pendulum";
    s.dim = 1;
    const double gl = p.at("g") / p.at("l");
    s.acceleration = [gl](std::span<const double> u, std::span<double> a) {
        a[0] = -gl * std::sin(u[0]);
    };
    s.acceleration_jvp = [gl](std::span<const double> u, std::span<const double> w,
                              std::span<double> out) { out[0] = -gl * std::cos(u[0]) * w[0]; };
    s.noise_gain = {p.at("sigma")};
    s.initial_displacement = {p.at("theta0")};
    s.initial_velocity = {0.0};
    s.defaults = {5e-4, 5.0, 200};
    s.coord_names = {"theta"};
    return s;
}

SystemSpec duffing(const std::map<std::string, double>& p) {
    SystemSpec s;
    s.name = "duffing";
    s.dim = 1;
    const double k = p.at("k") / p.at("m"), al = p.at("alpha") / p.at("m");
    s.acceleration = [k, al](std::span<const double> u, std::span<double> a) {
        a[0] = -k * u[0] - al * u[0] * u[0] * u[0];
    };
    s.acceleration_jvp = [k, al](std::span<const double> u, std::span<const double> w,
                                 std::span<double> out) {
        out[0] = -(k + 3.0 * al * u[0] * u[0]) * w[0];
    };
    s.noise_gain = {p.at("sigma") / p.at("m")};
    s.initial_displacement = {p.at("x0")};
    s.initial_velocity = {0.0};
    s.defaults = {1e-4, 1.0, 200};
    s.coord_names = {"X"};
    return s;
}

SystemSpec three_dof(const std::map<std::string, double>& p) {
    SystemSpec s;
    s.name = "3dof";
    s.dim = 3;
    const double w = p.at("k") / p.at("m");
    s.acceleration = [w](std::span<const double> u, std::span<double> a) {
        const double s1 = u[0], s2 = u[1] - u[0], s3 = u[2] - u[1];
        a[0] = -w * (s1 - s2);
        a[1] = -w * (s2 - s3);
        a[2] = -w * s3;
    };
    s.acceleration_jvp = [w](std::span<const double>, std::span<const double> x,
                             std::span<double> out) {
        const double s1 = x[0], s2 = x[1] - x[0], s3 = x[2] - x[1];
        out[0] = -w * (s1 - s2);
        out[1] = -w * (s2 - s3);
        out[2] = -w * s3;
    };
    const double g = p.at("sigma");
    s.noise_gain = {g, g, g};
    s.initial_displacement = {p.at("x1"), p.at("x2"), p.at("x3")};
    s.initial_velocity = {0.0, 0.0, 0.0};
    s.defaults = {1e-4, 1.0, 200};
    s.coord_names = {"X1", "X2", "X3"};
    return s;
}

std::vector<std::string> node_names(std::size_t n) {
    std::vector<std::string> names(n);
    for (std::size_t i = 0; i < n; ++i) names[i] = fmt::format("u{}", i);
    return names;
}

SystemSpec wave(const std::map<std::string, double>& p) {
    SystemSpec s;
    s.name = "wave";
    s.kind = SystemKind::ContinuousSpde;
    s.spatial = SpatialGrid{p.at("L"), p.at("dx"), Boundary::FixedFixed};
    const std::size_t n = s.spatial->node_count();
    require(n >= 3, ErrorKind::Config, "wave grid needs at least 3 nodes");
    s.dim = n;
    const double k = p.at("c") * p.at("c") / (p.at("dx") * p.at("dx"));
    auto lap = [n, k](std::span<const double> u, std::span<double> a) {
        a[0] = 0.0;
        a[n - 1] = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) a[i] = k * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
    };
    s.acceleration = lap;
    s.acceleration_jvp = [lap](std::span<const double>, std::span<const double> w,
                               std::span<double> out) { lap(w, out); };
    s.fixed.assign(n, false);
    s.fixed.front() = s.fixed.back() = true;
    s.noise_gain.assign(n, p.at("sigma"));
    s.noise_gain.front() = s.noise_gain.back() = 0.0;
    const auto x = s.spatial->nodes();
    s.initial_displacement.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        s.initial_displacement[i] = std::cos(2.0 * std::numbers::pi * x[i]);
    s.initial_displacement.front() = s.initial_displacement.back() = 0.0;
    s.initial_velocity.assign(n, 0.0);
    s.params["c"] = p.at("c");
    s.defaults = {1e-4, 1.0, 30};
    s.coord_names = node_names(n);
    return s;
}

SystemSpec beam(const std::map<std::string, double>& p) {
    SystemSpec s;
    s.name = "beam";
    s.kind = SystemKind::ContinuousSpde;
    s.spatial = SpatialGrid{p.at("L"), p.at("dx"), Boundary::ClampedFree};
    const std::size_t n = s.spatial->node_count();
    require(n >= 4, ErrorKind::Config, "beam grid needs at least 4 nodes");
    s.dim = n;
    const double area = p.at("b") * p.at("h");
    const double inertia = p.at("b") * std::pow(p.at("h"), 3) / 12.0;
    const double c = p.at("E") * inertia / (p.at("rho") * area);
    const double inv_dx2 = 1.0 / (p.at("dx") * p.at("dx"));
    // Curvature rows j = 0..n-2; the clamped root uses the ghost node u_{-1} = u_1.
    auto stiffness = [n, c, inv_dx2](std::span<const double> u, std::span<double> a) {
        thread_local std::vector<double> k;
        k.resize(n - 1);
        k[0] = 2.0 * (u[1] - u[0]) * inv_dx2;
        for (std::size_t j = 1; j + 1 < n; ++j) k[j] = (u[j - 1] - 2.0 * u[j] + u[j + 1]) * inv_dx2;
        std::fill(a.begin(), a.end(), 0.0);
        a[1] += 2.0 * k[0] * inv_dx2;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            a[j - 1] += k[j] * inv_dx2;
            a[j] -= 2.0 * k[j] * inv_dx2;
            a[j + 1] += k[j] * inv_dx2;
        }
        for (std::size_t i = 0; i < n; ++i) a[i] *= -c;
        a[0] = 0.0;
    };
    s.acceleration = stiffness;
    s.acceleration_jvp = [stiffness](std::span<const double>, std::span<const double> w,
                                     std::span<double> out) { stiffness(w, out); };
    s.fixed.assign(n, false);
    s.fixed.front() = true;
    s.noise_gain.assign(n, p.at("sigma"));
    s.noise_gain.front() = 0.0;
    const auto x = s.spatial->nodes();
    s.initial_displacement.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        s.initial_displacement[i] = cantilever_mode(x[i], p.at("psi"), p.at("L"));
    s.initial_displacement.front() = 0.0;
    s.initial_velocity.assign(n, 0.0);
    s.params["c"] = c;
    s.params["A"] = area;
    s.params["I"] = inertia;
    s.defaults = {1e-4, 2.0, 20};
    s.coord_names = node_names(n);
    return s;
}

}  // namespace

SystemSpec benchmark_spec(const std::string& name, const std::map<std::string, double>& overrides) {
    auto p = merged(name, overrides);
    SystemSpec s;
    if (name == "harmonic") s = harmonic(p);
    else if (name == "pendulum") s = pendulum(p);
    else if (name == "duffing") s = duffing(p);
    else if (name == "3dof") s = three_dof(p);
    else if (name == "wave") s = wave(p);
    else s = beam(p);
    for (const auto& [k, v] : p) s.params.emplace(k, v);
    s.validate();
    return s;
}

}  // namespace lagdisc
