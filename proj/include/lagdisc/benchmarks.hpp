#pragma once

#include "lagdisc/sim.hpp"

#include <map>
#include <string>
#include <vector>

namespace lagdisc {

const std::vector<std::string>& benchmark_names();

/// Parameter names (and default values) accepted by a benchmark.
std::map<std::string, double> benchmark_default_params(const std::string& name);

/**
 * @brief Builds one of the six benchmark systems.
 *
 * Unknown names raise a lookup error listing the valid names; unknown parameter keys raise a
 * config error. Overrides replace the defaults by name.
 */
SystemSpec benchmark_spec(const std::string& name,
                          const std::map<std::string, double>& overrides = {});

/// Cantilever first-mode shape used as the beam initial condition.
double cantilever_mode(double x, double psi, double length);

}  // namespace lagdisc
