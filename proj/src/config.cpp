#include "lagdisc/config.hpp"

#include "lagdisc/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

namespace lagdisc {

namespace {

template <typename T>
std::optional<T> get(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, fmt::format("config key '{}' has the wrong type: {}", key, e.what()));
    }
}

template <typename T>
void put(nlohmann::json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <typename T>
void take(std::optional<T>& dst, const std::optional<T>& src) {
    if (src) dst = src;
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorKind::Config, "config must be a JSON object");
    static const std::set<std::string> known{"subcommand", "system", "dt", "t_f", "n_real", "seed",
                                             "params", "lambda_lagrangian", "lambda_diffusion",
                                             "output_dir", "ensemble", "only"};
    for (const auto& [k, v] : j.items())
        require(known.count(k) > 0, ErrorKind::Config, fmt::format("unknown config key '{}'", k));
    RunConfig c;
    c.subcommand = get<std::string>(j, "subcommand");
    c.system = get<std::string>(j, "system");
    c.dt = get<double>(j, "dt");
    c.t_f = get<double>(j, "t_f");
    if (j.contains("n_real")) {
        const auto& v = j.at("n_real");
        require(v.is_number_unsigned(), ErrorKind::Config, "config key 'n_real' must be a positive integer");
        c.n_real = v.get<std::size_t>();
    }
    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        require(v.is_number_unsigned(), ErrorKind::Config, "config key 'seed' must be a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    }
    if (auto p = get<std::map<std::string, double>>(j, "params")) c.params = *p;
    c.lambda_lagrangian = get<double>(j, "lambda_lagrangian");
    c.lambda_diffusion = get<double>(j, "lambda_diffusion");
    c.output_dir = get<std::string>(j, "output_dir");
    c.ensemble = get<std::string>(j, "ensemble");
    if (auto o = get<std::vector<std::string>>(j, "only")) c.only = *o;
    return c;
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j = nlohmann::json::object();
    put(j, "subcommand", c.subcommand);
    put(j, "system", c.system);
    put(j, "dt", c.dt);
    put(j, "t_f", c.t_f);
    put(j, "n_real", c.n_real);
    put(j, "seed", c.seed);
    if (!c.params.empty()) j["params"] = c.params;
    put(j, "lambda_lagrangian", c.lambda_lagrangian);
    put(j, "lambda_diffusion", c.lambda_diffusion);
    put(j, "output_dir", c.output_dir);
    put(j, "ensemble", c.ensemble);
    if (!c.only.empty()) j["only"] = c.only;
    return j;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    require(f.good(), ErrorKind::Io, fmt::format("cannot open config file '{}'", path.string()));
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, fmt::format("config file '{}' is not valid JSON: {}", path.string(), e.what()));
    }
    return config_from_json(j);
}

RunConfig merge(RunConfig base, const RunConfig& o) {
    take(base.subcommand, o.subcommand);
    take(base.system, o.system);
    take(base.dt, o.dt);
    take(base.t_f, o.t_f);
    take(base.n_real, o.n_real);
    take(base.seed, o.seed);
    for (const auto& [k, v] : o.params) base.params[k] = v;
    take(base.lambda_lagrangian, o.lambda_lagrangian);
    take(base.lambda_diffusion, o.lambda_diffusion);
    take(base.output_dir, o.output_dir);
    take(base.ensemble, o.ensemble);
    if (!o.only.empty()) base.only = o.only;
    return base;
}

BenchmarkConfig to_benchmark_config(const RunConfig& c, const std::string& system) {
    BenchmarkConfig b;
    b.system = system;
    b.dt = c.dt;
    b.t_f = c.t_f;
    b.n_real = c.n_real;
    b.params = c.params;
    b.lambda_lagrangian = c.lambda_lagrangian;
    b.lambda_diffusion = c.lambda_diffusion;
    return b;
}

}  // namespace lagdisc
