#include "lagdisc/bench.hpp"
#include "lagdisc/benchmarks.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lagdisc;

namespace {

SystemSpec quiet(SystemSpec s) {
    std::fill(s.noise_gain.begin(), s.noise_gain.end(), 0.0);
    return s;
}

/// Harmonic run with a reduced prediction ensemble to keep the test fast.
BenchmarkConfig small_harmonic() {
    BenchmarkConfig c;
    c.system = "harmonic";
    c.prediction_n_real = 20;
    return c;
}

bool all_finite(const nlohmann::json& j) {
    if (j.is_null()) return false;
    if (j.is_number_float()) return std::isfinite(j.get<double>());
    if (j.is_structured())
        for (const auto& x : j)
            if (!all_finite(x)) return false;
    return true;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("true harmonic Hamiltonian is 125 along a noiseless trajectory") {
    const auto spec = quiet(benchmark_spec("harmonic"));
    const auto e = generate_ensemble(spec, 1e-4, 1.0, 1, 1);
    const auto h = hamiltonian_trajectory(legendre_transform(true_full_lagrangian(spec)), e, 0, false);
    REQUIRE(h.size() == e.n_steps);
    for (double x : h) CHECK(x == doctest::Approx(125.0).epsilon(1e-3));
}

TEST_CASE("staggered velocities keep the exact initial energy and drop the last sample") {
    const auto spec = quiet(benchmark_spec("wave", {{"dx", 0.05}}));
    const auto e = generate_ensemble(spec, 1e-4, 0.2, 1, 1);
    const auto H = legendre_transform(true_full_lagrangian(spec));
    const auto h = hamiltonian_trajectory(H, e, 0, true);
    CHECK(h.size() == e.n_steps - 1);
    std::vector<double> u(e.coords), v(e.coords, 0.0);
    for (std::size_t c = 0; c < e.coords; ++c) u[c] = e.u(0, c)[0];
    CHECK(h[0] == H.evaluate(u, v));
    for (double x : h) CHECK(x == doctest::Approx(h[0]).epsilon(1e-3));
}

TEST_CASE("truth model equations reproduce the benchmark drift") {
    for (const char* name : {"harmonic", "pendulum", "duffing", "3dof"}) {
        CAPTURE(name);
        const auto spec = benchmark_spec(name);
        std::vector<std::size_t> targets(spec.dim);
        for (std::size_t i = 0; i < spec.dim; ++i) targets[i] = i;
        const auto truth = true_model(spec, targets);
        const auto rebuilt = spec_from_equations(spec, truth.equations);
        std::vector<double> u(spec.dim), a(spec.dim), b(spec.dim);
        for (std::size_t i = 0; i < spec.dim; ++i) u[i] = 0.3 - 0.2 * static_cast<double>(i);
        spec.acceleration(u, a);
        rebuilt.acceleration(u, b);
        for (std::size_t i = 0; i < spec.dim; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
        CHECK(rebuilt.noise_gain == spec.noise_gain);
    }
}

TEST_CASE("truth compared with itself has zero prediction error") {
    const auto spec = benchmark_spec("duffing");
    const auto b = prediction_comparison(spec, spec, 1e-4, 0.1, 0.2, 8, 3, {0});
    CHECK(b.window_rms_error_pct == 0.0);
    CHECK_FALSE(b.diverged);
    REQUIRE(b.series.size() == 1);
    for (double x : b.series[0].abs_error) CHECK(x == 0.0);
    CHECK(b.series[0].t.back() == doctest::Approx(0.2));
    const auto empty_window = prediction_comparison(spec, spec, 1e-4, 0.1, 0.1, 4, 3, {0});
    CHECK(empty_window.window_rms_error_pct == 0.0);
    CHECK(empty_window.series[0].t.back() == doctest::Approx(0.1));
    CHECK(testing::error_kind([&] { prediction_comparison(spec, spec, 1e-4, 0.2, 0.1, 4, 3, {0}); }) ==
          ErrorKind::InvalidArgument);
}

TEST_CASE("benchmark report is complete, finite and self-consistent") {
    const auto rep = run_benchmark(small_harmonic(), 17);
    REQUIRE(rep.ok);
    const auto& j = rep.json;
    CHECK(j.at("schema_version") == kReportSchemaVersion);
    CHECK(j.at("seed") == 17);
    CHECK(j.at("status") == "ok");
    CHECK(all_finite(j));
    CHECK_FALSE(j.contains("runtime_s"));
    for (const char* key : {"discovered", "truth", "parameters", "relative_error_pct", "gains",
                            "diffusion_error_pct", "support", "hamiltonian", "prediction", "settings"})
        CHECK(j.contains(key));
    const auto p_true = j.at("parameters").at("truth").get<std::map<std::string, double>>();
    const auto p_disc = j.at("parameters").at("discovered").get<std::map<std::string, double>>();
    CHECK(std::abs(relative_error(p_true, p_disc) - j.at("relative_error_pct").get<double>()) <= 1e-12);
    CHECK(j.at("relative_error_pct").get<double>() < 1.0);
    CHECK(j.at("support").at("exact") == true);
    CHECK(rep.runtime_s > 0.0);
}

TEST_CASE("benchmark reruns are byte-identical and files are written") {
    const auto a = run_benchmark(small_harmonic(), 5);
    const auto b = run_benchmark(small_harmonic(), 5);
    CHECK(a.json.dump() == b.json.dump());
    const auto dir = std::filesystem::temp_directory_path() / "lagdisc_test_reports";
    std::filesystem::remove_all(dir);
    write_report(a, dir / "a");
    write_report(b, dir / "b");
    for (const char* file : {"report.json", "prediction_X.csv", "hamiltonian.csv"}) {
        CAPTURE(file);
        const auto fa = slurp(dir / "a" / "harmonic" / file);
        CHECK_FALSE(fa.empty());
        CHECK(fa == slurp(dir / "b" / "harmonic" / file));
    }
    const auto csv = slurp(dir / "a" / "harmonic" / "prediction_X.csv");
    CHECK(csv.rfind("t,truth_mean,pred_mean,truth_2sigma,pred_2sigma,abs_error\n", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("stage failures produce structured reports") {
    auto c = small_harmonic();
    c.lambda_lagrangian = 1e12;
    const auto rep = run_benchmark(c, 1);
    CHECK_FALSE(rep.ok);
    CHECK(rep.stage == "discover-lagrangian");
    REQUIRE(rep.error_kind.has_value());
    CHECK(*rep.error_kind == ErrorKind::DiscoveryFailure);
    CHECK(rep.json.at("status") == "failed");
    CHECK(rep.json.at("failure").at("stage") == "discover-lagrangian");

    BenchmarkConfig unknown;
    unknown.system = "nope";
    const auto u = run_benchmark(unknown, 1);
    CHECK_FALSE(u.ok);
    CHECK(u.stage == "config");
    CHECK(*u.error_kind == ErrorKind::Lookup);

    auto unstable = small_harmonic();
    unstable.system = "wave";
    unstable.dt = 0.01;
    const auto s = run_benchmark(unstable, 1);
    CHECK(*s.error_kind == ErrorKind::Stability);
}

TEST_CASE("benchmark defaults exist for every benchmark") {
    for (const auto& name : benchmark_names()) {
        CAPTURE(name);
        const auto d = benchmark_defaults(name);
        CHECK(d.lambda_lagrangian > 0.0);
        CHECK(d.lambda_diffusion > 0.0);
        CHECK(d.prediction_factor == 2.0);
        CHECK(d.prediction_n_real == 200);
    }
    CHECK(testing::error_kind([] { benchmark_defaults("nope"); }) == ErrorKind::Lookup);
}
