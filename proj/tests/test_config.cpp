#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

#include "heraldsim/config.hpp"
#include "heraldsim/errors.hpp"

using namespace heraldsim;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("empty text gives the default protocol") {
  const RunConfig rc = parse_config_text("");
  const ProtocolConfig d = default_config();
  CHECK(rc.protocol.params.g == d.params.g);
  CHECK(rc.protocol.write.amplitude == doctest::Approx(d.write.amplitude));
  CHECK(rc.protocol.delays == d.delays);
  CHECK(rc.workers == 1);
  CHECK(rc.write_csv);
  CHECK(rc.write_json);
}

TEST_CASE("frequencies are converted to angular units") {
  const RunConfig rc = parse_config_text("[params]\ng = 0.86 MHz\nJ_c = 8.45 GHz  # comment\n");
  CHECK(rc.protocol.params.g == doctest::Approx(2.0 * M_PI * 0.86e-3).epsilon(1e-14));
  CHECK(rc.protocol.params.J_c == doctest::Approx(2.0 * M_PI * 8.45).epsilon(1e-14));
  // Pulse defaults follow the final parameters.
  const RunConfig shifted = parse_config_text("[params]\nJ_c = 8 GHz\n");
  const SystemParams& p = shifted.protocol.params;
  CHECK(shifted.protocol.write.detuning == doctest::Approx(p.J_c + p.Omega_plus()));
  CHECK(shifted.protocol.read.detuning == doctest::Approx(p.J_c - p.Omega_plus()));
}

TEST_CASE("times, temperatures and grids parse with units") {
  const RunConfig rc = parse_config_text(
      "[protocol]\nherald_time = 0.03 us\ndelays = 0:150:16\ntemperatures = 0, 0.1 K, 0.2\n"
      "[params]\ntemperature = 50e-3 K\n");
  CHECK(rc.protocol.herald_time == doctest::Approx(30.0));
  REQUIRE(rc.protocol.delays.size() == 16);
  CHECK(rc.protocol.delays[1] == doctest::Approx(10.0));
  CHECK(rc.protocol.temperatures == std::vector<double>{0.0, 0.1, 0.2});
  CHECK(rc.protocol.params.temperature == doctest::Approx(0.05));
  const auto g = parse_grid("5:60:56");
  CHECK(g.size() == 56);
  CHECK(g.front() == 5.0);
  CHECK(g.back() == 60.0);
  CHECK(parse_grid("1 us:2 us:2")[1] == doctest::Approx(2000.0));
  CHECK_THROWS_AS(parse_grid("1:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("1:2:0"), std::invalid_argument);
}

TEST_CASE("errors carry origin, line and key") {
  CHECK(message_of("[params]\n\ng = 1 MHz\nbogus = 3\n") == "cfg:4: unknown key 'params.bogus'");
  CHECK(message_of("[params]\ng = 0.86\n").find("frequency needs a unit") != std::string::npos);
  CHECK(message_of("[params]\ng = 0.86\n").find("cfg:2") == 0);
  CHECK(message_of("[params]\nkappa_minus = -3 MHz\n").find("kappa_minus") != std::string::npos);
  CHECK(message_of("g = 1 MHz\n").find("outside any [section]") != std::string::npos);
  CHECK(message_of("[numerics]\ncutoffs = 3, 3, 4\n").find("4 integers") != std::string::npos);
  CHECK(message_of("[run]\nformats = xml\n") != "");
  CHECK(message_of("[numerics]\ndt = 0.001\nsteps_per_ns = 848\n").find("either") != std::string::npos);
  CHECK(message_of("{\"params\": {\"nope\": 1}}").find("unknown key 'params.nope'") != std::string::npos);
  CHECK(message_of("{\"params\": 3}").find("section object") != std::string::npos);
}

TEST_CASE("protocol violations keep their category through the parser") {
  CHECK_THROWS_AS(parse_config_text("[protocol]\nherald_time = 10 ns\n"), ProtocolViolation);
  CHECK_NOTHROW(parse_config_text("[protocol]\nherald_time = 10 ns\nallow_early_herald = true\n"));
}

TEST_CASE("JSON input matches the key = value form") {
  const RunConfig a = parse_config_text("[params]\ng = 1.2 MHz\n[numerics]\ncutoffs = 3, 3, 5, 5\n");
  const RunConfig b =
      parse_config_text(R"({"params": {"g": "1.2 MHz"}, "numerics": {"cutoffs": [3, 3, 5, 5]}})");
  CHECK(a.protocol.params.g == b.protocol.params.g);
  CHECK(a.protocol.cutoffs == b.protocol.cutoffs);
}

TEST_CASE("overrides apply after the file") {
  const RunConfig rc = parse_config_text("[params]\ng = 1 MHz\n", "cfg",
                                         {{"params.g", "2 MHz"}, {"run.workers", "3"}});
  CHECK(rc.protocol.params.g == doctest::Approx(2.0 * M_PI * 2e-3));
  CHECK(rc.workers == 3);
  CHECK_THROWS_AS(parse_config_text("", "cfg", {{"g", "2 MHz"}}), ConfigError);
}

TEST_CASE("resolved config round trips through its JSON echo") {
  const RunConfig rc = parse_config_text(
      "[params]\ng = 0.91 MHz\ntemperature = 0.1 K\n[protocol]\nreadout_offset = -8.5 ns\n"
      "delays = 0:150:16\n[numerics]\ncutoffs = 3, 3, 5, 5\n[run]\nworkers = 2\n");
  const std::string dump = config_to_json(rc).dump();
  const RunConfig back = parse_config_text(dump, "echo");
  const ProtocolConfig& a = rc.protocol;
  const ProtocolConfig& b = back.protocol;
  const double rel = 1e-15;
  CHECK(close(a.params.g, b.params.g, rel));
  CHECK(close(a.params.J_c, b.params.J_c, rel));
  CHECK(close(a.params.kappa_plus, b.params.kappa_plus, rel));
  CHECK(close(a.params.kappa_minus, b.params.kappa_minus, rel));
  CHECK(close(a.params.Omega_1, b.params.Omega_1, rel));
  CHECK(close(a.params.Omega_2, b.params.Omega_2, rel));
  CHECK(close(a.params.gamma, b.params.gamma, rel));
  CHECK(a.params.temperature == b.params.temperature);
  CHECK(close(a.write.amplitude, b.write.amplitude, rel));
  CHECK(close(a.read.detuning, b.read.detuning, rel));
  CHECK(a.readout_offset.value() == b.readout_offset.value());
  CHECK(a.delays == b.delays);
  CHECK(a.cutoffs == b.cutoffs);
  CHECK(a.dt == b.dt);
  CHECK(back.workers == 2);
  // The echo is stable under a second pass.
  CHECK(config_to_json(back).dump() == dump);
}

TEST_CASE("config files are read from disk") {
  const auto path = std::filesystem::temp_directory_path() / "heraldsim_test_config.cfg";
  {
    std::ofstream out(path);
    out << "[protocol]\nherald_time = 32 ns\n";
  }
  CHECK(parse_config(path).protocol.herald_time == doctest::Approx(32.0));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(parse_config(path), ConfigError);
}

TEST_CASE("worker count environment override") {
  ::unsetenv("HERALD_SIM_WORKERS");
  CHECK(resolve_workers(3) == 3);
  ::setenv("HERALD_SIM_WORKERS", "5", 1);
  CHECK(resolve_workers(3) == 5);
  ::setenv("HERALD_SIM_WORKERS", "zero", 1);
  CHECK_THROWS_AS(resolve_workers(3), ConfigError);
  ::unsetenv("HERALD_SIM_WORKERS");
}
