#include "lagdisc/config.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace lagdisc;

namespace {

RunConfig full_config() {
    RunConfig c;
    c.subcommand = "bench";
    c.system = "duffing";
    c.dt = 2e-4;
    c.t_f = 0.5;
    c.n_real = 64;
    c.seed = 99;
    c.params = {{"k", 900.0}, {"sigma", 0.5}};
    c.lambda_lagrangian = 3.0;
    c.lambda_diffusion = 0.1;
    c.output_dir = "out";
    c.ensemble = "e.bin";
    c.only = {"harmonic", "duffing"};
    return c;
}

}  // namespace

TEST_CASE("config round-trips through JSON") {
    const auto c = full_config();
    CHECK(config_from_json(to_json(c)) == c);
    CHECK(config_from_json(nlohmann::json::object()) == RunConfig{});
}

TEST_CASE("malformed configs are rejected") {
    using nlohmann::json;
    CHECK(testing::error_kind([] { config_from_json(json{{"sistem", "harmonic"}}); }) == ErrorKind::Config);
    CHECK(testing::error_kind([] { config_from_json(json{{"dt", "small"}}); }) == ErrorKind::Config);
    CHECK(testing::error_kind([] { config_from_json(json{{"n_real", -3}}); }) == ErrorKind::Config);
    CHECK(testing::error_kind([] { config_from_json(json{{"seed", 1.5}}); }) == ErrorKind::Config);
    CHECK(testing::error_kind([] { config_from_json(json::array()); }) == ErrorKind::Config);
}

TEST_CASE("config files are loaded or fail with the right kind") {
    const auto dir = std::filesystem::temp_directory_path() / "lagdisc_test_config";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "good.json") << to_json(full_config()).dump(2);
        std::ofstream(dir / "bad.json") << "{ not json";
    }
    CHECK(load_config(dir / "good.json") == full_config());
    CHECK(testing::error_kind([&] { load_config(dir / "bad.json"); }) == ErrorKind::Config);
    CHECK(testing::error_kind([&] { load_config(dir / "missing.json"); }) == ErrorKind::Io);
    std::filesystem::remove_all(dir);
}

TEST_CASE("overrides win and params merge key by key") {
    auto base = full_config();
    RunConfig o;
    o.seed = 7;
    o.params = {{"k", 1000.0}, {"x0", 0.2}};
    const auto m = merge(base, o);
    CHECK(m.seed == 7u);
    CHECK(m.system == base.system);
    CHECK(m.only == base.only);
    CHECK(m.params == std::map<std::string, double>{{"k", 1000.0}, {"sigma", 0.5}, {"x0", 0.2}});
    o.only = {"wave"};
    CHECK(merge(base, o).only == std::vector<std::string>{"wave"});
    CHECK(merge(base, RunConfig{}) == base);
}

TEST_CASE("run config maps onto a benchmark config") {
    const auto b = to_benchmark_config(full_config(), "harmonic");
    CHECK(b.system == "harmonic");
    CHECK(b.dt == 2e-4);
    CHECK(b.t_f == 0.5);
    CHECK(b.n_real == 64u);
    CHECK(b.params.at("k") == 900.0);
    CHECK(b.lambda_lagrangian == 3.0);
    CHECK(b.lambda_diffusion == 0.1);
    CHECK_FALSE(b.prediction_n_real.has_value());
}
