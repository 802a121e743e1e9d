// lagdisc: simulate benchmark ensembles, discover stochastic Lagrangians, run the benchmark suite.
//
// Exit codes: 0 ok, 2 configuration or usage, 3 stability or divergence, 4 file I/O,
// 5 discovery failure or unsupported model.

#include "lagdisc/bench.hpp"
#include "lagdisc/benchmarks.hpp"
#include "lagdisc/config.hpp"
#include "lagdisc/discovery.hpp"
#include "lagdisc/ensemble_io.hpp"
#include "lagdisc/error.hpp"
#include "lagdisc/library.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace lagdisc;

namespace {

constexpr const char* kOutputDirEnv = "LAGDISC_OUTPUT_DIR";
constexpr const char* kFallbackOutputDir = "lagdisc_out";

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Config:
    case ErrorKind::Lookup:
    case ErrorKind::Schema:
        return 2;
    case ErrorKind::Stability:
    case ErrorKind::Divergence:
        return 3;
    case ErrorKind::Io:
        return 4;
    case ErrorKind::Numerical:
    case ErrorKind::Unsupported:
    case ErrorKind::DiscoveryFailure:
        return 5;
    }
    return 5;
}

/// Flag values collected by CLI11; unset options stay empty so the config file can fill them.
struct Flags {
    std::string config_path;
    RunConfig cfg;
    std::vector<std::string> params;
    std::string only;
};

void add_common(CLI::App& app, Flags& f) {
    app.add_option("-c,--config", f.config_path, "JSON run configuration; flags override its values");
    app.add_option("-s,--system", f.cfg.system, "benchmark name");
    app.add_option("--seed", f.cfg.seed, fmt::format("base seed (default {})", kDefaultSeed));
    app.add_option("--dt", f.cfg.dt, "time step [s]");
    app.add_option("--t-f", f.cfg.t_f, "final time [s]");
    app.add_option("--n-real", f.cfg.n_real, "number of realizations");
    app.add_option("-p,--param", f.params, "parameter override name=value (repeatable)");
    app.add_option("-o,--output-dir", f.cfg.output_dir,
                   fmt::format("output directory (default ${} or ./{})", kOutputDirEnv,
                               kFallbackOutputDir));
}

void add_lambdas(CLI::App& app, Flags& f) {
    app.add_option("--lambda-l", f.cfg.lambda_lagrangian, "Lagrangian STLS threshold");
    app.add_option("--lambda-d", f.cfg.lambda_diffusion, "diffusion STLS threshold");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

RunConfig resolve(Flags& f, const std::string& subcommand) {
    for (const auto& p : f.params) {
        const auto eq = p.find('=');
        require(eq != std::string::npos && eq > 0, ErrorKind::Config,
                fmt::format("parameter override '{}' is not name=value", p));
        try {
            std::size_t used = 0;
            const std::string value = p.substr(eq + 1);
            f.cfg.params[p.substr(0, eq)] = std::stod(value, &used);
            require(used == value.size(), ErrorKind::Config, "trailing characters");
        } catch (const std::logic_error&) {
            fail(ErrorKind::Config, fmt::format("parameter override '{}' has no numeric value", p));
        }
    }
    if (!f.only.empty()) f.cfg.only = split_list(f.only);
    RunConfig c = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
    c = merge(std::move(c), f.cfg);
    if (c.subcommand)
        require(*c.subcommand == subcommand, ErrorKind::Config,
                fmt::format("config is for '{}', not '{}'", *c.subcommand, subcommand));
    c.subcommand = subcommand;
    return c;
}

std::uint64_t seed_of(const RunConfig& c) { return c.seed.value_or(kDefaultSeed); }

fs::path output_dir(const RunConfig& c) {
    if (c.output_dir) return *c.output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return kFallbackOutputDir;
}

void header(const std::string& subcommand, const RunConfig& c) {
    fmt::print("# lagdisc {} seed={}{}\n", subcommand, seed_of(c), c.seed ? "" : " (default)");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
    out << text;
    require(static_cast<bool>(out), ErrorKind::Io, fmt::format("write to '{}' failed", path.string()));
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorKind::Io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
}

const std::string& system_of(const RunConfig& c) {
    require(c.system.has_value(), ErrorKind::Config, "no system given (--system or config key)");
    return *c.system;
}

int cmd_simulate(const RunConfig& c) {
    const auto& name = system_of(c);
    const auto spec = benchmark_spec(name, c.params);
    header("simulate", c);
    const double dt = c.dt.value_or(spec.defaults.dt);
    const double t_f = c.t_f.value_or(spec.defaults.t_f);
    const std::size_t n_real = c.n_real.value_or(spec.defaults.n_real);
    const auto e = generate_ensemble(spec, dt, t_f, n_real, seed_of(c));
    const fs::path dir = output_dir(c);
    make_dir(dir);
    const fs::path bin = dir / (name + "_ensemble.bin");
    write_ensemble_binary(bin, e);
    RunConfig record = c;
    record.seed = seed_of(c);
    write_text(dir / (name + "_simulate.json"), to_json(record).dump(2) + "\n");
    fmt::print("{}: {} realizations x {} samples x {} coords -> {}\n", name, e.n_real, e.n_steps,
               e.coords, bin.string());
    return 0;
}

int cmd_discover(const RunConfig& c) {
    const auto& name = system_of(c);
    const auto spec = benchmark_spec(name, c.params);
    const auto defaults = benchmark_defaults(name);
    header("discover", c);
    Ensemble e;
    if (c.ensemble) {
        e = read_ensemble_binary(*c.ensemble);
        require(e.coords == spec.dim, ErrorKind::Schema,
                fmt::format("ensemble has {} coordinates but '{}' has {}", e.coords, name, spec.dim));
        require(e.coord_names == spec.coord_names, ErrorKind::Schema,
                fmt::format("ensemble coordinate names do not match '{}'", name));
    } else {
        e = generate_ensemble(spec, c.dt.value_or(spec.defaults.dt),
                              c.t_f.value_or(spec.defaults.t_f),
                              c.n_real.value_or(spec.defaults.n_real), seed_of(c));
    }
    DiscoveryOptions lo, dop;
    lo.lambda = c.lambda_lagrangian.value_or(defaults.lambda_lagrangian);
    lo.rank_tolerance = defaults.rank_tolerance_lagrangian;
    dop.lambda = c.lambda_diffusion.value_or(defaults.lambda_diffusion);
    dop.rank_tolerance = defaults.rank_tolerance_diffusion;
    const auto libs = build_lagrangian_library(spec, default_library_options(name));
    const auto L = discover_lagrangian(e, libs, lo);
    const auto D = discover_diffusion(e, L, build_diffusion_library(spec, default_diffusion_options(name)), dop);
    const auto eom = derive_equations_of_motion(L, D);
    const auto H = legendre_transform(L);

    const fs::path dir = output_dir(c) / name;
    make_dir(dir);
    write_text(dir / "lagrangian.json", L.to_json().dump(2) + "\n");
    write_text(dir / "diffusion.json", D.to_json().dump(2) + "\n");
    write_text(dir / "equations.json", eom.to_json().dump(2) + "\n");
    write_text(dir / "hamiltonian.json", H.to_json().dump(2) + "\n");
    const std::string text = fmt::format("L = {}\nD: {}\nEOM:\n{}\nH = {}\n", L.expression(),
                                         D.expression(), eom.text(), H.expression());
    write_text(dir / "models.txt", text);
    fmt::print("{}", text);
    return 0;
}

std::string csv_field(std::string s) {
    for (char& ch : s)
        if (ch == '\n') ch = ';';
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

int cmd_bench(const RunConfig& c) {
    std::vector<std::string> names = c.only.empty() ? benchmark_names() : c.only;
    for (const auto& n : names) (void)benchmark_default_params(n);  // rejects unknown names early
    header("bench", c);
    const fs::path dir = output_dir(c);
    make_dir(dir);
    std::string summary = "system,status,equations,relative_error_pct,diffusion_error_pct\n";
    std::string timing = "system,runtime_s\n";
    int code = 0;
    for (const auto& name : names) {
        const auto rep = run_benchmark(to_benchmark_config(c, name), seed_of(c));
        write_report(rep, dir);
        const auto& j = rep.json;
        auto number = [&](const char* key) {
            return j.contains(key) ? fmt::format("{:.6g}", j.at(key).get<double>()) : std::string();
        };
        const std::string eq = rep.ok ? j.at("discovered").at("equations").get<std::string>() : "";
        summary += fmt::format("{},{},{},{},{}\n", name, rep.ok ? "ok" : "failed", csv_field(eq),
                               number("relative_error_pct"), number("diffusion_error_pct"));
        timing += fmt::format("{},{:.3f}\n", name, rep.runtime_s);
        if (rep.ok) {
            fmt::print("{:<9} ok      error {:>10}%  ({:.1f} s)\n", name, number("relative_error_pct"),
                       rep.runtime_s);
        } else {
            fmt::print("{:<9} FAILED  [{}] {}: {}\n", name, rep.stage,
                       rep.error_kind ? to_string(*rep.error_kind) : "error", rep.message);
            if (code == 0) code = rep.error_kind ? exit_code(*rep.error_kind) : 5;
        }
    }
    write_text(dir / "summary.csv", summary);
    write_text(dir / "timing.csv", timing);
    fmt::print("summary -> {}\n", (dir / "summary.csv").string());
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic Lagrangian discovery from ensemble responses"};
    app.require_subcommand(1);
    Flags sim_f, disc_f, bench_f;

    auto* sim = app.add_subcommand("simulate", "simulate a benchmark ensemble to a binary file");
    add_common(*sim, sim_f);

    auto* disc = app.add_subcommand("discover", "discover L, diffusion, EOM and H for a benchmark");
    add_common(*disc, disc_f);
    add_lambdas(*disc, disc_f);
    disc->add_option("-e,--ensemble", disc_f.cfg.ensemble, "binary ensemble file (default: simulate inline)");

    auto* bench = app.add_subcommand("bench", "run benchmarks and write reports and summary.csv");
    add_common(*bench, bench_f);
    add_lambdas(*bench, bench_f);
    bench->add_option("--only", bench_f.only, "comma-separated benchmark subset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(resolve(sim_f, "simulate"));
        if (disc->parsed()) return cmd_discover(resolve(disc_f, "discover"));
        return cmd_bench(resolve(bench_f, "bench"));
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
}
