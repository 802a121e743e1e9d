#pragma once

#include "lagdisc/bench.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lagdisc {

/**
 * @brief Settings of one CLI invocation, loadable from a JSON file.
 *
 * Keys: subcommand, system, dt, t_f, n_real, seed, params, lambda_lagrangian, lambda_diffusion,
 * output_dir, ensemble, only. Unknown keys are rejected.
 */
struct RunConfig {
    std::optional<std::string> subcommand;
    std::optional<std::string> system;
    std::optional<double> dt;
    std::optional<double> t_f;
    std::optional<std::size_t> n_real;
    std::optional<std::uint64_t> seed;
    std::map<std::string, double> params;
    std::optional<double> lambda_lagrangian;
    std::optional<double> lambda_diffusion;
    std::optional<std::string> output_dir;
    std::optional<std::string> ensemble;  ///< binary ensemble file to discover from
    std::vector<std::string> only;        ///< benchmark subset for bench

    bool operator==(const RunConfig&) const = default;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);

/// Fields set in `overrides` replace those of `base`; params are merged key by key.
RunConfig merge(RunConfig base, const RunConfig& overrides);

BenchmarkConfig to_benchmark_config(const RunConfig& c, const std::string& system);

}  // namespace lagdisc
