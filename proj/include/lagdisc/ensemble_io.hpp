#pragma once

#include "lagdisc/sim.hpp"

#include <filesystem>

namespace lagdisc {

/**
 * @brief Binary ensemble container.
 *
 * Layout: 8-byte magic "LAGDENS1", little-endian uint64 header length, JSON header
 * (shape [N, n, N_t], dt, coords, optional spatial_grid), then displacement and velocity
 * as little-endian float64 in [realization][coord][sample] order.
 */
void write_ensemble_binary(const std::filesystem::path& path, const Ensemble& e);
Ensemble read_ensemble_binary(const std::filesystem::path& path);

/// Long-format CSV: realization, coord, t, u, u_t.
void write_ensemble_csv(const std::filesystem::path& path, const Ensemble& e);

}  // namespace lagdisc
