#include "lagdisc/ensemble_io.hpp"

#include "lagdisc/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace lagdisc {

namespace {

constexpr char kMagic[8] = {'L', 'A', 'G', 'D', 'E', 'N', 'S', '1'};

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

void write_doubles(std::ofstream& out, const std::vector<double>& data) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size() * sizeof(double)));
    } else {
        for (double d : data) {
            const double le = to_little(d);
            out.write(reinterpret_cast<const char*>(&le), sizeof(double));
        }
    }
}

void read_doubles(std::ifstream& in, std::vector<double>& data) {
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if constexpr (std::endian::native == std::endian::big)
        for (double& d : data) d = to_little(d);
}

}  // namespace

void write_ensemble_binary(const std::filesystem::path& path, const Ensemble& e) {
    nlohmann::json h;
    h["shape"] = {e.n_real, e.coords, e.n_steps};
    h["dt"] = e.dt;
    h["coords"] = e.coord_names;
    h["layout"] = "realization,coord,sample";
    h["arrays"] = {"displacement", "velocity"};
    if (e.spatial_grid) h["spatial_grid"] = *e.spatial_grid;
    const std::string header = h.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, fmt::format("cannot open '{}' for writing", path.string()));
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = to_little<std::uint64_t>(header.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    write_doubles(out, e.displacement);
    write_doubles(out, e.velocity);
    if (!out) fail(ErrorKind::Io, fmt::format("failed writing '{}'", path.string()));
}

Ensemble read_ensemble_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, fmt::format("cannot open ensemble file '{}'", path.string()));
    char magic[8];
    in.read(magic, sizeof(magic));
    require(in && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, ErrorKind::Schema,
            fmt::format("'{}' is not an ensemble container", path.string()));
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    len = to_little(len);
    require(in && len < (1u << 30), ErrorKind::Schema, "corrupt ensemble header length");
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    Ensemble e;
    try {
        const auto h = nlohmann::json::parse(header);
        const auto shape = h.at("shape").get<std::vector<std::size_t>>();
        require(shape.size() == 3, ErrorKind::Schema, "ensemble shape must have 3 entries");
        e.n_real = shape[0];
        e.coords = shape[1];
        e.n_steps = shape[2];
        e.dt = h.at("dt").get<double>();
        e.coord_names = h.at("coords").get<std::vector<std::string>>();
        if (h.contains("spatial_grid")) e.spatial_grid = h["spatial_grid"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& ex) {
        fail(ErrorKind::Schema, fmt::format("bad ensemble header: {}", ex.what()));
    }
    const std::size_t total = e.n_real * e.coords * e.n_steps;
    e.displacement.resize(total);
    e.velocity.resize(total);
    read_doubles(in, e.displacement);
    read_doubles(in, e.velocity);
    if (!in) fail(ErrorKind::Io, fmt::format("truncated ensemble file '{}'", path.string()));
    e.validate();
    return e;
}

void write_ensemble_csv(const std::filesystem::path& path, const Ensemble& e) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, fmt::format("cannot open '{}' for writing", path.string()));
    out << "realization,coord,t,u,u_t\n";
    for (std::size_t r = 0; r < e.n_real; ++r)
        for (std::size_t c = 0; c < e.coords; ++c) {
            const auto u = e.u(r, c);
            const auto v = e.v(r, c);
            const std::string name = c < e.coord_names.size() ? e.coord_names[c] : fmt::format("{}", c);
            for (std::size_t t = 0; t < e.n_steps; ++t)
                out << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", r, name,
                                   static_cast<double>(t) * e.dt, u[t], v[t]);
        }
    if (!out) fail(ErrorKind::Io, fmt::format("failed writing '{}'", path.string()));
}

}  // namespace lagdisc
