#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "heraldsim/config.hpp"
#include "heraldsim/errors.hpp"
#include "heraldsim/protocol.hpp"
#include "heraldsim/report.hpp"
#include "heraldsim/validation.hpp"

namespace fs = std::filesystem;
using namespace heraldsim;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string format;
  int workers = 0;
  std::vector<std::string> sets;
  std::string herald_time;
  std::string times;
  std::string delays;
  std::string temperatures;
  std::string route;
  bool zero_coherences = false;
  bool convergence = false;
};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

RunConfig load(const Options& o) {
  std::vector<ConfigOverride> ov;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set '" + s + "': expected section.key=value");
    ov.push_back({s.substr(0, eq), s.substr(eq + 1)});
  }
  if (!o.herald_time.empty()) ov.push_back({"protocol.herald_time", o.herald_time});
  if (!o.times.empty()) ov.push_back({"protocol.scan_times", o.times});
  if (!o.delays.empty()) ov.push_back({"protocol.delays", o.delays});
  if (!o.temperatures.empty()) ov.push_back({"protocol.temperatures", o.temperatures});
  if (!o.route.empty()) ov.push_back({"protocol.route", o.route});
  if (o.zero_coherences) ov.push_back({"protocol.zero_coherences", "true"});
  if (!o.out_dir.empty()) ov.push_back({"run.output_dir", o.out_dir});
  if (!o.format.empty()) ov.push_back({"run.formats", o.format});
  if (o.workers > 0) ov.push_back({"run.workers", std::to_string(o.workers)});
  if (o.convergence) ov.push_back({"run.convergence_check", "true"});
  RunConfig rc = o.config_path.empty() ? parse_config_text("", "<defaults>", ov)
                                       : parse_config(o.config_path, ov);
  rc.workers = resolve_workers(rc.workers);
  return rc;
}

ProtocolConfig refined(const ProtocolConfig& c) {
  ProtocolConfig r = c;
  for (int& n : r.cutoffs) ++n;
  r.dt = 0.5 * c.dt;
  return r;
}

void emit(const RunConfig& rc, const std::string& sub, Json result, const CsvTable& table) {
  std::error_code ec;
  fs::create_directories(rc.output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + rc.output_dir + "': " + ec.message());
  const Json echo = config_to_json(rc);
  if (rc.write_json) {
    Json j;
    j["tool"] = "heraldsim";
    j["subcommand"] = sub;
    j["timestamp"] = timestamp();
    j["config"] = echo;
    j["result"] = std::move(result);
    const fs::path p = fs::path(rc.output_dir) / "result.json";
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + p.string());
  }
  if (rc.write_csv) {
    const fs::path p = fs::path(rc.output_dir) / (sub + ".csv");
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    write_csv(out, table, echo);
    if (!out) throw IoError("write failed for " + p.string());
  }
}

int cmd_herald(const Options& o) {
  const RunConfig rc = load(o);
  const HeraldRunResult r = run_write_herald(rc.protocol);
  Json j = to_json(r);
  if (rc.convergence_check) {
    const HeraldRunResult f = run_write_herald(refined(rc.protocol));
    j["convergence"] = {{"concurrence_delta", std::abs(f.concurrence - r.concurrence)},
                        {"fidelity_delta", std::abs(f.fidelity.value - r.fidelity.value)},
                        {"negativity_delta", std::abs(f.negativity - r.negativity)}};
  }
  emit(rc, "herald", j, csv_table(r));
  std::cout << "concurrence " << format_number(r.concurrence) << "\nbell fidelity "
            << format_number(r.fidelity.value) << "\nherald probability "
            << format_number(r.herald_probability) << "\nheralding rate (MHz) "
            << format_number(r.heralding_rate_mhz) << '\n';
  return 0;
}

int cmd_scan(const Options& o) {
  const RunConfig rc = load(o);
  std::vector<double> grid = rc.protocol.scan_times;
  if (grid.empty()) grid = parse_grid("5:60:56");
  const auto scan = scan_herald_time(rc.protocol, grid);
  emit(rc, "herald-scan", to_json(scan), csv_table(scan));
  std::cout << scan.size() << " herald times written to " << rc.output_dir << '\n';
  return 0;
}

int cmd_interference(const Options& o) {
  const RunConfig rc = load(o);
  const InterferenceResult r = run_interference(rc.protocol);
  Json j = to_json(r);
  if (rc.convergence_check) {
    const InterferenceResult f = run_interference(refined(rc.protocol));
    j["convergence"] = {{"visibility_delta", std::abs(f.fit.visibility - r.fit.visibility)},
                        {"period_delta_ns", std::abs(f.fit.period - r.fit.period)}};
  }
  emit(rc, "interference", j, csv_table(r));
  std::cout << "visibility " << format_number(r.fit.visibility) << (r.fit.fit_ok ? "" : " (raw)")
            << "\nperiod (ns) " << format_number(r.fit.period) << " expected "
            << format_number(r.expected_period) << '\n';
  for (const auto& w : r.fit.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_temp(const Options& o) {
  const RunConfig rc = load(o);
  const auto sweep = run_temperature_sweep(rc.protocol, rc.workers);
  emit(rc, "temp-sweep", to_json(sweep), csv_table(sweep));
  for (const auto& p : sweep)
    std::cout << "T " << p.temperature << " K  N " << format_number(p.negativity) << "  V "
              << format_number(p.visibility) << '\n';
  return 0;
}

int cmd_validate(const Options& o) {
  const RunConfig rc = load(o);
  const auto checks = run_validation();
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  err " << format_number(c.value)
              << " tol " << format_number(c.tolerance);
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ')';
    std::cout << '\n';
  }
  emit(rc, "validate", to_json(checks), csv_table(checks));
  return ok ? 0 : static_cast<int>(ErrorCategory::Accuracy);
}

void common(CLI::App* sub, Options& o) {
  sub->add_option("-c,--config", o.config_path, "config file (key = value sections or JSON)")
      ->check(CLI::ExistingFile);
  sub->add_option("-o,--out", o.out_dir, "output directory");
  sub->add_option("--format", o.format, "csv, json or both");
  sub->add_option("-j,--workers", o.workers, "worker threads (HERALD_SIM_WORKERS overrides)");
  sub->add_option("--set", o.sets, "override, section.key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heraldsim: heralded mechanical entanglement simulator"};
  app.require_subcommand(1);
  Options o;
  int (*run)(const Options&) = nullptr;

  auto* herald = app.add_subcommand("herald", "write pulse, herald, entanglement metrics");
  common(herald, o);
  herald->add_option("--herald-time", o.herald_time, "herald time, e.g. 30 ns");
  herald->add_flag("--convergence-check", o.convergence, "rerun with refined cutoffs and steps");
  herald->callback([&] { run = cmd_herald; });

  auto* scan = app.add_subcommand("herald-scan", "metrics and heralding rate versus herald time");
  common(scan, o);
  scan->add_option("--times", o.times, "herald times, start:stop:count or comma list");
  scan->callback([&] { run = cmd_scan; });

  auto* inter = app.add_subcommand("interference", "readout fringe versus delay");
  common(inter, o);
  inter->add_option("--delays", o.delays, "delays, start:stop:count or comma list");
  inter->add_option("--route", o.route, "adjoint or direct");
  inter->add_flag("--zero-coherences", o.zero_coherences, "dephase the heralded mechanics");
  inter->add_option("--herald-time", o.herald_time, "herald time");
  inter->add_flag("--convergence-check", o.convergence, "rerun with refined cutoffs and steps");
  inter->callback([&] { run = cmd_interference; });

  auto* temp = app.add_subcommand("temp-sweep", "negativity and visibility versus temperature");
  common(temp, o);
  temp->add_option("--temperatures", o.temperatures, "temperatures in K, comma list");
  temp->add_option("--delays", o.delays, "delays, start:stop:count or comma list");
  temp->callback([&] { run = cmd_temp; });

  auto* val = app.add_subcommand("validate", "oracle and invariant suite");
  common(val, o);
  val->callback([&] { run = cmd_validate; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    return run(o);
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::InvalidArgument);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
