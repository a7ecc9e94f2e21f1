#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "heraldsim/protocol.hpp"

namespace heraldsim {

struct RunConfig {
  ProtocolConfig protocol = default_config();
  std::string output_dir = "heraldsim_out";
  bool write_csv = true;
  bool write_json = true;
  int workers = 1;
  std::uint64_t seed = 0;  // reserved, the pipeline is deterministic
  bool convergence_check = false;
};

// key = value text with [section] headers, or JSON with the same
// section/key structure. Frequencies need a Hz/kHz/MHz/GHz suffix and are
// stored as angular frequencies in rad/ns; times take an optional ns/us
// suffix. Unknown keys are rejected with file:line diagnostics.
struct ConfigOverride {
  std::string key;  // "section.key"
  std::string value;
};

// Overrides are applied after the file contents, before defaults are resolved.
RunConfig parse_config(const std::filesystem::path& path,
                       const std::vector<ConfigOverride>& overrides = {});
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>",
                            const std::vector<ConfigOverride>& overrides = {});

// "a:b:n": n evenly spaced points, both ends included.
std::vector<double> parse_grid(const std::string& text);

// Fully resolved config in the JSON input format; parse_config_text of the
// dump reproduces the config.
nlohmann::ordered_json config_to_json(const RunConfig& config);

// Worker count with HERALD_SIM_WORKERS taking precedence when set.
int resolve_workers(int configured);

}  // namespace heraldsim
