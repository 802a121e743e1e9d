#include "lagdisc/bench.hpp"

#include "lagdisc/basis.hpp"
#include "lagdisc/benchmarks.hpp"
#include "lagdisc/library.hpp"
#include "lagdisc/numdiff.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

namespace lagdisc {

namespace {

std::string name_of(const SystemSpec& spec, std::size_t c) {
    return c < spec.coord_names.size() ? spec.coord_names[c] : fmt::format("q{}", c);
}

std::vector<std::size_t> free_coords(const SystemSpec& spec) {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < spec.dim; ++c)
        if (c >= spec.fixed.size() || !spec.fixed[c]) out.push_back(c);
    return out;
}

std::vector<Term> truth_terms(const SystemSpec& spec, std::size_t i) {
    const auto& p = spec.params;
    std::vector<Term> t{{basis::kinetic(i, name_of(spec, i)), 1.0}};
    const std::string& n = spec.name;
    if (n == "harmonic") {
        t.push_back({basis::monomial(0, name_of(spec, 0), 2), -p.at("k") / (2.0 * p.at("m"))});
    } else if (n == "pendulum") {
        t.push_back({basis::trig(Func::Cos, Slot::Position, 0, name_of(spec, 0), 1.0), p.at("g") / p.at("l")});
    } else if (n == "duffing") {
        t.push_back({basis::monomial(0, name_of(spec, 0), 2), -p.at("k") / (2.0 * p.at("m"))});
        t.push_back({basis::monomial(0, name_of(spec, 0), 4), -p.at("alpha") / (4.0 * p.at("m"))});
    } else if (n == "3dof") {
        const double a = -p.at("k") / (2.0 * p.at("m"));
        auto diff = [&](std::size_t hi) {
            return basis::difference_monomial(hi, name_of(spec, hi), hi - 1, name_of(spec, hi - 1), 2);
        };
        if (i == 0) t.push_back({basis::monomial(0, name_of(spec, 0), 2), a});
        if (i >= 1) t.push_back({diff(i), a});
        if (i + 1 < spec.dim) t.push_back({diff(i + 1), a});
    } else if (n == "wave") {
        const double dx = spec.spatial->dx, c = p.at("c");
        for (std::size_t e = i == 0 ? 0 : i - 1; e <= i && e + 1 < spec.dim; ++e)
            t.push_back({basis::spatial_derivative_monomial(basis::gradient_edge(e, dx), 1, 2, "u_x^2"),
                         -0.5 * c * c});
    } else if (n == "beam") {
        const double dx = spec.spatial->dx, c = p.at("c");
        for (std::size_t j = i == 0 ? 0 : i - 1; j <= i + 1 && j + 1 < spec.dim; ++j)
            t.push_back({basis::spatial_derivative_monomial(basis::curvature(j, dx, true), 2, 2, "u_xx^2"),
                         -0.5 * c});
    } else {
        fail(ErrorKind::Lookup, fmt::format("no ground truth for system '{}'", n));
    }
    return t;
}

std::map<std::string, double> drift_parameters(const EquationsOfMotion& eom) {
    if (eom.field) return eom.field->operators;
    std::map<std::string, double> p;
    for (const auto& eq : eom.equations)
        for (const auto& t : eq.drift) p[eq.name + ":" + t.label] += t.coefficient;
    return p;
}

std::map<std::string, double> equation_parameters(const CoordinateEquation& eq) {
    std::map<std::string, double> p;
    for (const auto& t : eq.drift) p[t.label] += t.coefficient;
    return p;
}

double rms_ratio_pct(double num2, double den2) {
    return den2 > 0.0 ? 100.0 * std::sqrt(num2 / den2) : 0.0;
}

std::string csv_number(double x) { return fmt::format("{:.10g}", x); }

}  // namespace

BenchmarkDefaults benchmark_defaults(const std::string& name) {
    BenchmarkDefaults d;
    if (name == "harmonic") {
        // cos(X) is nearly collinear with X^2 at this amplitude; 5 admits it on most seeds.
        d.lambda_lagrangian = 20.0;
        d.lambda_diffusion = 0.25;
    } else if (name == "pendulum") {
        d.lambda_lagrangian = 1.0;
        d.lambda_diffusion = 0.0025;
    } else if (name == "duffing") {
        d.lambda_lagrangian = 5.0;
        d.lambda_diffusion = 0.25;
    } else if (name == "3dof") {
        d.lambda_lagrangian = 5.0;
        d.lambda_diffusion = 0.25;
    } else if (name == "wave") {
        d.lambda_lagrangian = 10.0;
        d.lambda_diffusion = 1.0;
        d.rank_tolerance_diffusion = 3e-3;
    } else if (name == "beam") {
        d.lambda_lagrangian = 1e4;
        d.lambda_diffusion = 100.0;
        d.rank_tolerance_lagrangian = 1e-9;
        d.rank_tolerance_diffusion = 3e-3;
    } else {
        benchmark_default_params(name);  // throws the lookup error with the valid names
    }
    return d;
}

TruthModel true_model(const SystemSpec& spec, const std::vector<std::size_t>& targets) {
    TruthModel m;
    std::vector<ParticleLagrangian> particles;
    for (auto i : targets) {
        require(i < spec.dim, ErrorKind::InvalidArgument, "truth target outside the system");
        ParticleLagrangian p;
        p.target = i;
        p.terms = truth_terms(spec, i);
        m.particles.push_back(p.terms);
        particles.push_back(std::move(p));
        m.gains[i] = spec.noise_gain.at(i);
    }
    m.total = pool_terms(particles);
    m.equations = derive_equations_of_motion(m.total, spec.coord_names, m.gains, targets,
                                             spec.spatial.has_value());
    m.hamiltonian = legendre_transform(m.total);
    return m;
}

std::vector<Term> true_full_lagrangian(const SystemSpec& spec) {
    std::vector<ParticleLagrangian> particles;
    for (auto i : free_coords(spec)) {
        ParticleLagrangian p;
        p.target = i;
        p.terms = truth_terms(spec, i);
        particles.push_back(std::move(p));
    }
    return pool_terms(particles);
}

SystemSpec spec_from_equations(const SystemSpec& truth, const EquationsOfMotion& eom) {
    if (truth.spatial) {
        require(eom.field.has_value(), ErrorKind::Unsupported, "field system without a field equation");
        std::map<std::string, double> params;
        for (const auto& [k, v] : benchmark_default_params(truth.name)) params[k] = truth.params.at(k);
        const auto& ops = eom.field->operators;
        const std::string op = truth.name == "wave" ? "u_xx" : "u_xxxx";
        for (const auto& [k, v] : ops)
            require(k == op, ErrorKind::Unsupported,
                    fmt::format("operator '{}' is outside the {} family", k, truth.name));
        require(ops.count(op) > 0, ErrorKind::Unsupported, fmt::format("no '{}' operator discovered", op));
        const double kappa = ops.at(op);
        if (truth.name == "wave") {
            require(kappa < 0.0, ErrorKind::Unsupported, "discovered wave speed squared is not positive");
            params["c"] = std::sqrt(-kappa);
        } else {
            require(kappa > 0.0, ErrorKind::Unsupported, "discovered beam stiffness is not positive");
            params["E"] = truth.params.at("E") * kappa / truth.params.at("c");
        }
        params["sigma"] = eom.field->gain;
        auto s = benchmark_spec(truth.name, params);
        s.name = truth.name + "-discovered";
        return s;
    }

    SystemSpec s = truth;
    s.name = truth.name + "-discovered";
    std::vector<std::vector<EomTerm>> drift(truth.dim);
    s.noise_gain.assign(truth.dim, 0.0);
    for (const auto& eq : eom.equations) {
        require(eq.coord < truth.dim, ErrorKind::InvalidArgument, "equation for an unknown coordinate");
        drift[eq.coord] = eq.drift;
        s.noise_gain[eq.coord] = eq.gain;
    }
    // Normal-form coefficients: the acceleration is -sum kappa * atom.
    s.acceleration = [drift](std::span<const double> u, std::span<double> a) {
        for (std::size_t c = 0; c < drift.size(); ++c) {
            double sum = 0.0;
            for (const auto& t : drift[c]) sum -= t.coefficient * t.atom.value(t.atom.form.eval(u));
            a[c] = sum;
        }
    };
    s.acceleration_jvp = [drift](std::span<const double> u, std::span<const double> w,
                                 std::span<double> out) {
        for (std::size_t c = 0; c < drift.size(); ++c) {
            double sum = 0.0;
            for (const auto& t : drift[c]) {
                double dir = 0.0;
                for (const auto& [k, wk] : t.atom.form.terms) dir += wk * w[k];
                sum -= t.coefficient * t.atom.d1(t.atom.form.eval(u)) * dir;
            }
            out[c] = sum;
        }
    };
    return s;
}

PredictionBundle prediction_comparison(const SystemSpec& truth, const SystemSpec& discovered,
                                       double dt, double training_t_f, double horizon,
                                       std::size_t n_real, std::uint64_t seed,
                                       const std::vector<std::size_t>& probes) {
    require(horizon >= training_t_f, ErrorKind::InvalidArgument,
            "prediction horizon must cover the training window");
    require(truth.dim == discovered.dim, ErrorKind::InvalidArgument, "systems differ in dimension");
    PredictionBundle b;
    b.training_t_f = training_t_f;
    b.horizon = horizon;
    const std::size_t n_samples = sample_count(horizon, dt);
    const std::size_t stride = std::max<std::size_t>(1, (n_samples + 3999) / 4000);
    const auto mt = ensemble_moments(truth, dt, n_samples, n_real, seed, stride);
    const auto md = ensemble_moments(discovered, dt, n_samples, n_real, seed, stride);
    b.n_real = std::min(mt.n_real, md.n_real);
    if (mt.diverged || md.diverged) {
        b.diverged = true;
        b.divergence = mt.diverged ? "truth: " + mt.divergence_message
                                   : "discovered: " + md.divergence_message;
    }
    const std::size_t kept = mt.n_steps;
    auto at = [&](const EnsembleMoments& m, std::size_t c, std::size_t k) { return m.mean[c * kept + k]; };
    double num2 = 0.0, den2 = 0.0;
    for (auto c : free_coords(truth))
        for (std::size_t k = 0; k < kept; ++k) {
            const double t = static_cast<double>(k) * mt.dt;
            if (t <= training_t_f * (1.0 + 1e-12)) continue;
            const double d = at(md, c, k) - at(mt, c, k);
            num2 += d * d;
            den2 += at(mt, c, k) * at(mt, c, k);
        }
    b.window_rms_error_pct = rms_ratio_pct(num2, den2);
    for (auto c : probes) {
        require(c < truth.dim, ErrorKind::InvalidArgument, "probe coordinate outside the system");
        PredictionSeries s;
        s.coord = c;
        s.name = name_of(truth, c);
        for (std::size_t k = 0; k < kept; ++k) {
            const std::size_t i = c * kept + k;
            s.t.push_back(static_cast<double>(k) * mt.dt);
            s.truth_mean.push_back(mt.mean[i]);
            s.pred_mean.push_back(md.mean[i]);
            s.truth_2sigma.push_back(2.0 * std::sqrt(mt.variance[i]));
            s.pred_2sigma.push_back(2.0 * std::sqrt(md.variance[i]));
            s.abs_error.push_back(std::abs(md.mean[i] - mt.mean[i]));
        }
        b.series.push_back(std::move(s));
    }
    return b;
}

std::vector<double> hamiltonian_trajectory(const HamiltonianModel& h, const Ensemble& e,
                                           std::size_t realization, bool central_velocity) {
    require(realization < e.n_real, ErrorKind::InvalidArgument, "realization index out of range");
    std::vector<std::vector<double>> vel(e.coords);
    for (std::size_t c = 0; c < e.coords; ++c) {
        const auto u = e.u(realization, c);
        if (central_velocity && e.n_steps >= 3) vel[c] = numdiff::central_first_derivative(u, e.dt);
        else vel[c].assign(e.v(realization, c).begin(), e.v(realization, c).end());
    }
    // Staggered velocities: sample 0 keeps the exact initial velocity and the last sample has no
    // forward neighbour, so it is dropped.
    const bool staggered = central_velocity && e.n_steps >= 3;
    if (staggered)
        for (std::size_t c = 0; c < e.coords; ++c) vel[c][0] = e.v(realization, c)[0];
    std::vector<double> out(staggered ? e.n_steps - 1 : e.n_steps), u(e.coords), v(e.coords);
    for (std::size_t t = 0; t < out.size(); ++t) {
        for (std::size_t c = 0; c < e.coords; ++c) {
            u[c] = e.u(realization, c)[t];
            v[c] = vel[c][t];
        }
        out[t] = h.evaluate(u, v);
    }
    return out;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    BenchmarkReport rep;
    rep.system = config.system;
    nlohmann::json& j = rep.json;
    j["schema_version"] = kReportSchemaVersion;
    j["system"] = config.system;
    j["seed"] = seed;
    std::string stage = "config";
    try {
        const auto defaults = benchmark_defaults(config.system);
        const auto spec = benchmark_spec(config.system, config.params);
        const double dt = config.dt.value_or(spec.defaults.dt);
        const double t_f = config.t_f.value_or(spec.defaults.t_f);
        const std::size_t n_real = config.n_real.value_or(spec.defaults.n_real);
        DiscoveryOptions lo, dop;
        lo.lambda = config.lambda_lagrangian.value_or(defaults.lambda_lagrangian);
        lo.rank_tolerance = config.rank_tolerance_lagrangian.value_or(defaults.rank_tolerance_lagrangian);
        dop.lambda = config.lambda_diffusion.value_or(defaults.lambda_diffusion);
        dop.rank_tolerance = config.rank_tolerance_diffusion.value_or(defaults.rank_tolerance_diffusion);
        const double factor = config.prediction_factor.value_or(defaults.prediction_factor);
        const std::size_t pred_n = config.prediction_n_real.value_or(defaults.prediction_n_real);
        require(factor >= 1.0, ErrorKind::Config, "prediction factor must be at least 1");
        j["settings"] = {{"dt", dt},
                         {"t_f", t_f},
                         {"n_real", n_real},
                         {"params", spec.params},
                         {"lambda_lagrangian", lo.lambda},
                         {"lambda_diffusion", dop.lambda},
                         {"rank_tolerance_lagrangian", lo.rank_tolerance},
                         {"rank_tolerance_diffusion", dop.rank_tolerance},
                         {"prediction_factor", factor},
                         {"prediction_n_real", pred_n}};

        stage = "simulate";
        const auto e = generate_ensemble(spec, dt, t_f, n_real, seed);

        stage = "discover-lagrangian";
        const auto libs = build_lagrangian_library(spec, default_library_options(config.system));
        const auto L = discover_lagrangian(e, libs, lo);
        std::vector<std::size_t> targets;
        for (const auto& lib : libs) targets.push_back(lib.target_coord);

        stage = "discover-diffusion";
        const auto dlib = build_diffusion_library(spec, default_diffusion_options(config.system));
        const auto D = discover_diffusion(e, L, dlib, dop);
        j["library"] = {{"lagrangian_size", libs.front().size()},
                        {"targets", targets.size()},
                        {"diffusion_size", dlib.size()}};

        stage = "equations";
        const auto truth = true_model(spec, targets);
        const auto eom = derive_equations_of_motion(L, D);
        const auto H = legendre_transform(L);
        j["discovered"] = {{"lagrangian", L.expression()},
                           {"diffusion", D.expression()},
                           {"equations", eom.text()},
                           {"hamiltonian", H.expression()},
                           {"lagrangian_model", L.to_json()},
                           {"diffusion_model", D.to_json()},
                           {"equations_model", eom.to_json()}};
        j["truth"] = {{"lagrangian", format_terms(truth.total, 4)},
                      {"equations", truth.equations.text()},
                      {"hamiltonian", truth.hamiltonian.expression()}};

        const auto p_true = drift_parameters(truth.equations);
        const auto p_disc = drift_parameters(eom);
        j["parameters"] = {{"truth", p_true}, {"discovered", p_disc}};
        j["relative_error_pct"] = relative_error(p_true, p_disc);
        if (!eom.field) {
            nlohmann::json per = nlohmann::json::object();
            for (std::size_t k = 0; k < eom.equations.size(); ++k)
                per[eom.equations[k].name] = relative_error(equation_parameters(truth.equations.equations[k]),
                                                            equation_parameters(eom.equations[k]));
            j["equation_errors_pct"] = per;
        }

        std::map<std::string, double> g_true, g_disc;
        std::map<std::string, int> status;
        for (const auto& p : D.particles) {
            const std::string nm = name_of(spec, p.target);
            g_true[nm] = truth.gains.at(p.target);
            g_disc[nm] = p.status == "ok" ? p.gain : 0.0;
            ++status[p.status];
        }
        j["gains"] = {{"truth", g_true}, {"discovered", g_disc}, {"status", status}};
        j["diffusion_error_pct"] = relative_error(g_true, g_disc);

        bool exact = true;
        nlohmann::json mismatches = nlohmann::json::array();
        for (std::size_t k = 0; k < L.particles.size(); ++k) {
            std::set<std::string> want, got;
            for (const auto& t : truth.particles[k]) want.insert(t.basis.label);
            for (const auto& t : L.particles[k].terms) got.insert(t.basis.label);
            if (want == got) continue;
            exact = false;
            std::vector<std::string> missing, extra;
            std::set_difference(want.begin(), want.end(), got.begin(), got.end(), std::back_inserter(missing));
            std::set_difference(got.begin(), got.end(), want.begin(), want.end(), std::back_inserter(extra));
            if (mismatches.size() < 10)
                mismatches.push_back({{"target", name_of(spec, L.particles[k].target)},
                                      {"missing", missing},
                                      {"extra", extra}});
        }
        j["support"] = {{"exact", exact}, {"mismatches", mismatches}};

        if (eom.field) {
            if (config.system == "wave") {
                const double c2 = eom.field->operators.count("u_xx") ? -eom.field->operators.at("u_xx") : 0.0;
                j["field"] = {{"c2", c2}, {"c2_truth", spec.params.at("c") * spec.params.at("c")}};
            } else {
                double sum = 0.0;
                int n = 0;
                for (const auto& t : L.total)
                    if (t.basis.family == "u_xx^2") {
                        sum += std::abs(t.coefficient);
                        ++n;
                    }
                const double c = eom.field->operators.count("u_xxxx") ? eom.field->operators.at("u_xxxx") : 0.0;
                j["field"] = {{"curvature_coefficient", n ? sum / n : 0.0},
                              {"curvature_coefficient_truth", 0.5 * spec.params.at("c")},
                              {"c", c},
                              {"c_truth", spec.params.at("c")}};
            }
        }

        stage = "hamiltonian";
        const bool central = spec.spatial.has_value();
        const auto h_true = hamiltonian_trajectory(truth.hamiltonian, e, 0, central);
        const auto h_disc = hamiltonian_trajectory(H, e, 0, central);
        double gap = 0.0;
        for (std::size_t t = 0; t < h_true.size(); ++t)
            gap = std::max(gap, std::abs(h_disc[t] - h_true[t]) / std::abs(h_true[t]));
        SystemSpec quiet = spec;
        std::fill(quiet.noise_gain.begin(), quiet.noise_gain.end(), 0.0);
        const auto e0 = generate_ensemble(quiet, dt, t_f, 1, seed);
        const auto h0 = hamiltonian_trajectory(legendre_transform(true_full_lagrangian(spec)), e0, 0, central);
        double drift = 0.0;
        for (double x : h0) drift = std::max(drift, std::abs(x - h0.front()) / std::abs(h0.front()));
        j["hamiltonian"] = {{"true_drift_pct", 100.0 * drift}, {"max_gap_pct", 100.0 * gap}};
        const std::size_t hs = std::max<std::size_t>(1, (h_true.size() + 1999) / 2000);
        for (std::size_t t = 0; t < h_true.size(); t += hs) {
            rep.hamiltonian_t.push_back(static_cast<double>(t) * dt);
            rep.hamiltonian_true.push_back(h_true[t]);
            rep.hamiltonian_discovered.push_back(h_disc[t]);
        }

        stage = "prediction";
        const auto disc_spec = spec_from_equations(spec, eom);
        std::vector<std::size_t> probes;
        if (spec.spatial) {
            const std::size_t n = spec.dim;
            probes = config.system == "wave" ? std::vector<std::size_t>{n / 4, n / 2, 3 * n / 4}
                                             : std::vector<std::size_t>{n / 2, n - 1};
        } else {
            probes = free_coords(spec);
        }
        rep.prediction = prediction_comparison(spec, disc_spec, dt, t_f, factor * t_f, pred_n, seed, probes);
        j["prediction"] = {{"horizon", rep.prediction.horizon},
                           {"n_real", rep.prediction.n_real},
                           {"window_rms_error_pct", rep.prediction.window_rms_error_pct},
                           {"diverged", rep.prediction.diverged},
                           {"divergence", rep.prediction.divergence}};
        rep.ok = true;
        j["status"] = "ok";
    } catch (const Error& err) {
        rep.ok = false;
        rep.stage = stage;
        rep.error_kind = err.kind();
        rep.message = err.what();
        j["status"] = "failed";
        j["failure"] = {{"stage", stage}, {"kind", to_string(err.kind())}, {"message", err.what()}};
    }
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

void write_report(const BenchmarkReport& report, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path out = dir / report.system;
    std::error_code ec;
    fs::create_directories(out, ec);
    require(!ec, ErrorKind::Io, fmt::format("cannot create '{}': {}", out.string(), ec.message()));
    auto open = [](const fs::path& p) {
        std::ofstream f(p, std::ios::binary);
        require(f.good(), ErrorKind::Io, fmt::format("cannot write '{}'", p.string()));
        return f;
    };
    {
        auto f = open(out / "report.json");
        f << report.json.dump(2) << "\n";
    }
    for (const auto& s : report.prediction.series) {
        auto f = open(out / fmt::format("prediction_{}.csv", s.name));
        f << "t,truth_mean,pred_mean,truth_2sigma,pred_2sigma,abs_error\n";
        for (std::size_t k = 0; k < s.t.size(); ++k)
            f << fmt::format("{},{},{},{},{},{}\n", csv_number(s.t[k]), csv_number(s.truth_mean[k]),
                             csv_number(s.pred_mean[k]), csv_number(s.truth_2sigma[k]),
                             csv_number(s.pred_2sigma[k]), csv_number(s.abs_error[k]));
    }
    if (!report.hamiltonian_t.empty()) {
        auto f = open(out / "hamiltonian.csv");
        f << "t,true_h,discovered_h\n";
        for (std::size_t k = 0; k < report.hamiltonian_t.size(); ++k)
            f << fmt::format("{},{},{}\n", csv_number(report.hamiltonian_t[k]),
                             csv_number(report.hamiltonian_true[k]), csv_number(report.hamiltonian_discovered[k]));
    }
}

}  // namespace lagdisc
