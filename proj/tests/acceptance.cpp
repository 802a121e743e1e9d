// Acceptance checks: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include "lagdisc/bench.hpp"
#include "lagdisc/benchmarks.hpp"
#include "lagdisc/numdiff.hpp"
#include "lagdisc/regression.hpp"
#include "lagdisc/rng.hpp"
#include "lagdisc/sim.hpp"
#include "oracles.hpp"

#include <fmt/core.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace lagdisc;

namespace {

// Pinned tolerances.
constexpr double kHarmonicErrPct = 1.0, kHarmonicGainRel = 0.10;
constexpr double kPendulumErrPct = 1.0, kPendulumGainRel = 0.20, kPendulumGain = 0.10;
constexpr double kDuffingErrPct = 1.0;
constexpr double kThreeDofEqErrPct = 0.5;
constexpr double kWaveErrPct = 5.0, kWaveC2 = 4.0, kWaveC2Rel = 0.02;
constexpr double kBeamErrPct = 1.0, kBeamCurvature = 0.1035, kBeamCurvatureRel = 0.02;
constexpr double kStlsRelTol = 1e-10;
constexpr double kTaylorOrderLo = 1.3, kTaylorOrderHi = 1.7;
constexpr double kEmOrderLo = 0.35, kEmOrderHi = 0.65;
constexpr double kRk4MinSlope = 1.5;
constexpr double kStencilOrderTol = 0.15;
constexpr double kDriftPct = 0.1, kGapPct = 1.0;
constexpr double kWindowRmsPct = 5.0;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    fmt::print("{} criterion {}: {} | {}\n", pass ? "PASS" : "FAIL", id, name, detail);
    std::fflush(stdout);
    if (!pass) ++failures;
}

bool within_rel(double x, double target, double rel) { return std::abs(x - target) <= rel * std::abs(target); }

double num(const nlohmann::json& j, const char* a, const char* b) { return j.at(a).at(b).get<double>(); }

// 1, 2, 6, 7: default benchmark runs

std::map<std::string, BenchmarkReport> run_all() {
    std::map<std::string, BenchmarkReport> out;
    for (const auto& name : benchmark_names()) {
        BenchmarkConfig c;
        c.system = name;
        auto rep = run_benchmark(c, kDefaultSeed);
        fmt::print("  {}: {} in {:.1f} s{}\n", name, rep.ok ? "ok" : "failed", rep.runtime_s,
                   rep.ok ? "" : fmt::format(" at {} ({})", rep.stage, rep.message));
        std::fflush(stdout);
        out.emplace(name, std::move(rep));
    }
    return out;
}

void criterion_accuracy(const std::map<std::string, BenchmarkReport>& reps) {
    bool pass = true;
    std::string detail;
    auto note = [&](bool ok, const std::string& s) {
        pass = pass && ok;
        detail += fmt::format("{}{}; ", s, ok ? "" : " [x]");
    };
    for (const auto& [name, rep] : reps) {
        if (!rep.ok) {
            note(false, fmt::format("{} failed at {}", name, rep.stage));
            continue;
        }
        const auto& j = rep.json;
        const double err = j.at("relative_error_pct").get<double>();
        const auto& gains = j.at("gains").at("discovered");
        const auto& pd = j.at("parameters").at("discovered");
        if (name == "harmonic") {
            const double g = gains.at("X").get<double>();
            note(err <= kHarmonicErrPct && within_rel(g, 1.0, kHarmonicGainRel),
                 fmt::format("harmonic err {:.4f}% gain {:.4f}", err, g));
        } else if (name == "pendulum") {
            const double g = gains.at("theta").get<double>();
            note(err <= kPendulumErrPct && within_rel(g, kPendulumGain, kPendulumGainRel),
                 fmt::format("pendulum err {:.4f}% gain {:.4f}", err, g));
        } else if (name == "duffing") {
            const bool both = pd.contains("X:X") && pd.contains("X:X^3");
            note(err <= kDuffingErrPct && both, fmt::format("duffing err {:.4f}% k,alpha {}", err, both));
        } else if (name == "3dof") {
            double worst = 0.0;
            for (const auto& [eq, e] : j.at("equation_errors_pct").items()) worst = std::max(worst, e.get<double>());
            bool springs = true;
            for (const auto& [key, v] : j.at("parameters").at("truth").items())
                if (key.find(":gain") == std::string::npos) springs = springs && pd.contains(key);
            note(worst <= kThreeDofEqErrPct && springs,
                 fmt::format("3dof worst equation err {:.4f}% springs {}", worst, springs));
        } else if (name == "wave") {
            const double c2 = num(j, "field", "c2");
            note(err <= kWaveErrPct && within_rel(c2, kWaveC2, kWaveC2Rel),
                 fmt::format("wave err {:.4f}% c2 {:.4f}", err, c2));
        } else if (name == "beam") {
            const double c = num(j, "field", "curvature_coefficient");
            note(err <= kBeamErrPct && within_rel(c, kBeamCurvature, kBeamCurvatureRel),
                 fmt::format("beam err {:.4f}% c {:.5f}", err, c));
        }
    }
    detail += "runtimes";
    for (const auto& [name, rep] : reps) detail += fmt::format(" {}={:.0f}s", name, rep.runtime_s);
    report(1, "benchmark accuracy", pass, detail);
}

void criterion_support(const std::map<std::string, BenchmarkReport>& reps) {
    bool pass = true;
    std::string detail;
    for (const auto& [name, rep] : reps) {
        const bool exact = rep.ok && rep.json.at("support").at("exact").get<bool>();
        pass = pass && exact;
        detail += fmt::format("{}={} ", name, exact ? "exact" : "mismatch");
    }
    report(2, "exact support recovery", pass, detail);
}

void criterion_hamiltonian(const std::map<std::string, BenchmarkReport>& reps) {
    bool pass = true;
    std::string detail;
    for (const auto& [name, rep] : reps) {
        if (!rep.ok) {
            pass = false;
            detail += fmt::format("{} failed; ", name);
            continue;
        }
        const double drift = num(rep.json, "hamiltonian", "true_drift_pct");
        const double gap = num(rep.json, "hamiltonian", "max_gap_pct");
        const bool ok = drift < kDriftPct && gap < kGapPct;
        pass = pass && ok;
        detail += fmt::format("{} drift {:.4f}% gap {:.4f}%{}; ", name, drift, gap, ok ? "" : " [x]");
    }
    report(6, "Hamiltonian conservation and overlap", pass, detail);
}

void criterion_prediction(const std::map<std::string, BenchmarkReport>& reps) {
    bool pass = true;
    std::string detail;
    for (const auto& [name, rep] : reps) {
        if (!rep.ok) {
            pass = false;
            detail += fmt::format("{} failed; ", name);
            continue;
        }
        const double rms = num(rep.json, "prediction", "window_rms_error_pct");
        const bool diverged = rep.json.at("prediction").at("diverged").get<bool>();
        const bool ok = rms < kWindowRmsPct && !diverged;
        pass = pass && ok;
        detail += fmt::format("{} {:.3f}%{}; ", name, rms, ok ? "" : " [x]");
    }
    report(7, "prediction generalization", pass, detail);
}

// 3: STLS against an extended-precision oracle

void criterion_stls() {
    std::mt19937_64 rng(kDefaultSeed);
    std::uniform_int_distribution<int> p_dist(1, 20);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int p = p_dist(rng);
        const int n = std::uniform_int_distribution<int>(std::max(3 * p, 10), 500)(rng);
        Eigen::MatrixXd A(n, p);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) A(i, j) = g(rng);
            b(i) = g(rng);
        }
        const auto ref = oracle::normal_equations(A, b);
        const auto m = stls(A, b, 0.0);
        worst = std::max(worst, (m.coefficients - ref).norm() / ref.norm());
    }
    report(3, "STLS oracle equivalence", worst <= kStlsRelTol,
           fmt::format("100 systems, worst relative difference {:.2e} (tol {:.0e})", worst, kStlsRelTol));
}

// 4: integrator orders

void criterion_integrators() {
    const double theta = 1.0, b = 0.5, x0 = 1.0, T = 1.0;
    const ScalarAdditiveSde sde{[&](double x) { return -theta * x; }, [&](double) { return -theta; },
                                [](double) { return 0.0; }, b};
    std::mt19937_64 rng(kDefaultSeed);
    const std::size_t fine_n = 1024, paths = 2000;
    const std::vector<std::size_t> factors{8, 16, 32, 64, 128};
    std::vector<double> h, err_taylor(factors.size()), err_em(factors.size());
    for (auto f : factors) h.push_back(T / static_cast<double>(fine_n) * static_cast<double>(f));
    for (std::size_t m = 0; m < paths; ++m) {
        const auto fine = oracle::ou_joint_increments(theta, T / static_cast<double>(fine_n), fine_n, rng);
        for (std::size_t k = 0; k < factors.size(); ++k) {
            const auto c = oracle::coarsen(fine, theta, factors[k]);
            const double exact = oracle::ou_exact_path(theta, b, x0, c).back();
            err_taylor[k] += std::abs(taylor15_scalar_path(sde, x0, c.h, c.dW, c.dZ).back() - exact) / paths;
            err_em[k] += std::abs(euler_maruyama_scalar_path(sde, x0, c.h, c.dW).back() - exact) / paths;
        }
    }
    const double q_taylor = oracle::loglog_slope(h, err_taylor);
    const double q_em = oracle::loglog_slope(h, err_em);

    // Deterministic limit: noiseless pendulum against a fine RK4 reference.
    auto spec = benchmark_spec("pendulum");
    spec.noise_gain.assign(spec.noise_gain.size(), 0.0);
    const double t_end = 1.0;
    const auto ref = oracle::rk4(spec, 1e-5, 100000).first[0];
    std::vector<double> dts{4e-3, 2e-3, 1e-3, 5e-4}, err_det;
    for (double dt : dts) {
        NoiseStream noise(1);
        const auto tr = integrate_taylor15(spec, dt, sample_count(t_end, dt), noise);
        err_det.push_back(std::abs(tr.u(0).back() - ref));
    }
    const double q_det = oracle::loglog_slope(dts, err_det);

    const bool pass = q_taylor >= kTaylorOrderLo && q_taylor <= kTaylorOrderHi && q_em >= kEmOrderLo &&
                      q_em <= kEmOrderHi && q_det >= kRk4MinSlope;
    report(4, "integrator strong orders", pass,
           fmt::format("OU Taylor {:.3f} (want [{}, {}]), EM {:.3f} (want [{}, {}]), RK4 deterministic slope "
                       "{:.3f} (want >= {})",
                       q_taylor, kTaylorOrderLo, kTaylorOrderHi, q_em, kEmOrderLo, kEmOrderHi, q_det,
                       kRk4MinSlope));
}

// 5: finite-difference orders

double f0(double x) { return std::sin(1.3 * x + 0.4) + 0.2 * x * x * x; }
double f1(double x) { return 1.3 * std::cos(1.3 * x + 0.4) + 0.6 * x * x; }
double f2(double x) { return -1.69 * std::sin(1.3 * x + 0.4) + 1.2 * x; }
double fd(double x, int k) {
    const double w = 1.3, ph = 0.4;
    switch (k) {
        case 1: return f1(x);
        case 2: return f2(x);
        case 3: return -w * w * w * std::cos(w * x + ph) + 1.2;
        default: return w * w * w * w * std::sin(w * x + ph);
    }
}

/// Observed order of a series-based estimator: max error over all samples on [0, 1].
double series_order(const std::function<std::vector<double>(std::span<const double>, double)>& est,
                    double (*exact)(double)) {
    std::vector<double> hs, errs;
    for (int n : {40, 80, 160, 320}) {
        const double h = 1.0 / n;
        std::vector<double> s(n + 1);
        for (int i = 0; i <= n; ++i) s[i] = f0(i * h);
        const auto d = est(s, h);
        double e = 0.0;
        for (int i = 0; i <= n; ++i) e = std::max(e, std::abs(d[i] - exact(i * h)));
        hs.push_back(h);
        errs.push_back(e);
    }
    return oracle::loglog_slope(hs, errs);
}

void criterion_stencils() {
    using namespace numdiff;
    struct Row {
        std::string name;
        double observed;
        int declared;
    };
    std::vector<Row> rows;
    rows.push_back({"central d1", series_order(central_first_derivative, f1), truncation_order(Scheme::Central)});
    rows.push_back({"forward d1", series_order(forward_first_derivative, f1), truncation_order(Scheme::Forward)});
    rows.push_back({"central d2", series_order(central_second_derivative, f2), 2});

    // Three-point Lagrange stencil around x = 0.7, steps h and r*h.
    for (double ratio : {1.0, 1.6}) {
        std::vector<double> hs, e1, e2;
        StencilResult last;
        for (double h : {0.04, 0.02, 0.01, 0.005}) {
            const double x = 0.7, h2 = ratio * h;
            last = lagrange_three_point(f0(x - h), f0(x), f0(x + h2), h, h2, 0.0);
            hs.push_back(h);
            e1.push_back(std::abs(last.first_derivative - f1(x)));
            e2.push_back(std::abs(last.second_derivative - f2(x)));
        }
        const std::string tag = ratio == 1.0 ? "uniform" : "nonuniform";
        rows.push_back({"lagrange d1 " + tag, oracle::loglog_slope(hs, e1), last.truncation_order});
        rows.push_back({"lagrange d2 " + tag, oracle::loglog_slope(hs, e2), last.second_derivative_order});
    }

    // Spatial derivatives of a field, orders 1..4, including boundary rows.
    std::vector<std::vector<double>> field_err(4);
    std::vector<double> field_h;
    for (int n : {40, 80, 160, 320}) {
        const double h = 1.0 / n;
        Eigen::MatrixXd f(n + 1, 2);
        for (int i = 0; i <= n; ++i) {
            f(i, 0) = f0(i * h);
            f(i, 1) = 2.0 * f0(i * h);
        }
        const auto d = field_spatial_derivatives(f, h, 4);
        for (int k = 0; k < 4; ++k) {
            double e = 0.0;
            for (int i = 0; i <= n; ++i)
                for (int c = 0; c < 2; ++c) e = std::max(e, std::abs(d[k](i, c) - (c + 1) * fd(i * h, k + 1)));
            field_err[k].push_back(e);
        }
        field_h.push_back(h);
    }
    for (int k = 0; k < 4; ++k)
        rows.push_back({fmt::format("field d{}", k + 1), oracle::loglog_slope(field_h, field_err[k]), 2});

    bool pass = true;
    std::string detail;
    for (const auto& r : rows) {
        const bool ok = std::abs(r.observed - r.declared) <= kStencilOrderTol;
        pass = pass && ok;
        detail += fmt::format("{} {:.2f}/{}{}; ", r.name, r.observed, r.declared, ok ? "" : " [x]");
    }
    report(5, "finite-difference orders", pass, detail);
}

// 8: determinism

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism(const std::map<std::string, BenchmarkReport>& first) {
    const auto dir = std::filesystem::temp_directory_path() / "lagdisc_acceptance";
    std::filesystem::remove_all(dir);
    bool pass = true;
    std::string detail;
    for (const auto& [name, rep] : first) {
        BenchmarkConfig c;
        c.system = name;
        const auto again = run_benchmark(c, kDefaultSeed);
        write_report(rep, dir / "a");
        write_report(again, dir / "b");
        bool same = rep.json.dump() == again.json.dump();
        for (const auto& entry : std::filesystem::directory_iterator(dir / "a" / name)) {
            const auto file = entry.path().filename();
            same = same && slurp(entry.path()) == slurp(dir / "b" / name / file);
        }
        pass = pass && same;
        detail += fmt::format("{}={} ", name, same ? "identical" : "differs");
    }
    std::filesystem::remove_all(dir);
    report(8, "bit-reproducible reruns", pass, detail);
}

}  // namespace

int main() {
    fmt::print("running default benchmarks (seed {})\n", kDefaultSeed);
    const auto reps = run_all();
    criterion_accuracy(reps);
    criterion_support(reps);
    criterion_stls();
    criterion_integrators();
    criterion_stencils();
    criterion_hamiltonian(reps);
    criterion_prediction(reps);
    criterion_determinism(reps);
    fmt::print("{} of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
