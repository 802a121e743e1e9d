#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace lagdisc {

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of realization `index` derived from the ensemble base seed.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/// Seeded source of standard normal draws for one trajectory.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed);
    std::uint64_t seed() const noexcept { return seed_; }
    double standard_normal() { return normal_(engine_); }
    /// Wiener increment ~ Normal(0, dt).
    double increment(double dt) { return std::sqrt(dt) * normal_(engine_); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::vector<double> wiener_increments(std::size_t n, double dt, std::uint64_t seed);

}  // namespace lagdisc
