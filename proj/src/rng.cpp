#include "lagdisc/rng.hpp"

#include "lagdisc/error.hpp"

#include <cmath>

namespace lagdisc {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
    return splitmix64(splitmix64(base_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

NoiseStream::NoiseStream(std::uint64_t seed) : seed_(seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
}

std::vector<double> wiener_increments(std::size_t n, double dt, std::uint64_t seed) {
    require(n >= 1, ErrorKind::InvalidArgument, "increment count must be at least 1");
    require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument,
            "time step must be positive");
    NoiseStream noise(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = noise.increment(dt);
    return out;
}

}  // namespace lagdisc
