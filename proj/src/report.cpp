#include "heraldsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace heraldsim {

namespace {

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Json fit_json(const VisibilityFit& f) {
  Json j;
  j["visibility"] = number(f.visibility);
  j["raw_visibility"] = number(f.raw);
  j["c0"] = number(f.c0);
  j["c1"] = number(f.c1);
  j["phase_rad"] = number(f.phase);
  j["omega_rad_per_ns"] = number(f.omega);
  j["period_ns"] = number(f.period);
  j["fit_ok"] = f.fit_ok;
  j["undersampled"] = f.undersampled;
  j["warnings"] = f.warnings;
  return j;
}

Json point_json(const HeraldPoint& p) {
  Json j;
  j["herald_time_ns"] = number(p.time);
  j["concurrence"] = number(p.concurrence);
  j["negativity"] = number(p.negativity);
  j["herald_probability"] = number(p.probability);
  j["heralding_rate_mhz"] = number(p.rate_mhz);
  j["qubit_weight"] = number(p.qubit_weight);
  j["two_photon_contamination"] = number(p.two_photon_contamination);
  return j;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const QubitMatrix& rho) {
  Json j;
  j["basis"] = {"|00>", "|01>", "|10>", "|11>"};
  j["modes"] = {"b1", "b2"};
  j["layout"] = "row-major 4x4, each entry [re, im]";
  Json rows = Json::array();
  for (int r = 0; r < 4; ++r) {
    Json row = Json::array();
    for (int c = 0; c < 4; ++c) row.push_back({rho(r, c).real(), rho(r, c).imag()});
    rows.push_back(row);
  }
  j["rho"] = rows;
  return j;
}

Json to_json(const RunDiagnostics& d) {
  Json j;
  j["max_trace_drift"] = number(d.max_trace_drift);
  j["min_eigenvalue"] = number(d.min_eigenvalue);
  j["max_hermiticity_error"] = number(d.max_hermiticity_error);
  j["hilbert_dimension"] = d.dimension;
  j["quantum_steps"] = d.quantum_steps;
  j["quantum_step_ns"] = number(d.quantum_step_ns);
  return j;
}

Json to_json(const HeraldRunResult& r) {
  Json j;
  j["herald_time_ns"] = r.herald_time;
  j["t_q_ns"] = number(r.t_q);
  j["t_q_optical_ns"] = number(r.t_q_optical);
  j["t_q_total_ns"] = number(r.t_q_total);
  j["concurrence"] = number(r.concurrence);
  j["negativity"] = number(r.negativity);
  j["qubit_negativity"] = number(r.qubit_negativity);
  j["bell_fidelity"] = {{"value", number(r.fidelity.value)},
                        {"phi_rad", number(r.fidelity.phi)},
                        {"convention", r.fidelity.convention}};
  j["herald_probability"] = number(r.herald_probability);
  j["heralding_rate_mhz"] = number(r.heralding_rate_mhz);
  j["single_photon_weight"] = number(r.herald.single_photon_weight);
  j["multi_photon_weight"] = number(r.herald.multi_photon_weight);
  j["two_photon_contamination"] = number(r.two_photon_contamination);
  j["qubit_weight"] = number(r.qubit_weight);
  j["diagonal_imbalance"] = number(r.diagonal_imbalance);
  j["herald_cavity"] = r.herald.cavity;
  j["rho_qubit"] = to_json(r.rho_qubit);
  j["cutoffs"] = r.cutoffs;
  j["diagnostics"] = to_json(r.diagnostics);
  Json s = Json::array();
  for (const auto& p : r.series) s.push_back(point_json(p));
  j["herald_scan"] = s;
  return j;
}

Json to_json(const InterferenceResult& r) {
  Json j;
  j["expected_period_ns"] = number(r.expected_period);
  j["readout_offset_ns"] = number(r.readout_offset);
  j["herald_probability"] = number(r.herald_probability);
  j["concurrence"] = number(r.concurrence);
  j["classical_intensity"] = number(r.classical_intensity);
  j["route_discrepancy"] = number(r.route_discrepancy);
  j["fit"] = fit_json(r.fit);
  if (!r.pattern_other_cavity.delays.empty()) j["fit_other_cavity"] = fit_json(r.fit_other);
  j["delays_ns"] = numbers(r.pattern.delays);
  j["readout_times_ns"] = numbers(r.readout_times);
  j["intensity"] = numbers(r.pattern.intensity);
  j["raw_intensity"] = numbers(r.raw_intensity);
  if (!r.pattern_other_cavity.delays.empty()) {
    j["intensity_other_cavity"] = numbers(r.pattern_other_cavity.intensity);
    j["raw_intensity_other_cavity"] = numbers(r.raw_intensity_other);
  }
  j["route"] = r.route_used;
  j["diagnostics"] = to_json(r.diagnostics);
  return j;
}

Json to_json(const std::vector<TemperaturePoint>& sweep) {
  Json a = Json::array();
  for (const auto& p : sweep) {
    Json j;
    j["temperature_K"] = p.temperature;
    j["n_th"] = number(p.n_th);
    j["negativity"] = number(p.negativity);
    j["concurrence"] = number(p.concurrence);
    j["visibility"] = number(p.visibility);
    j["raw_visibility"] = number(p.raw_visibility);
    j["fit_ok"] = p.fit_ok;
    j["cutoffs"] = p.cutoffs;
    a.push_back(j);
  }
  return a;
}

Json to_json(const std::vector<HeraldPoint>& scan) {
  Json a = Json::array();
  for (const auto& p : scan) a.push_back(point_json(p));
  return a;
}

Json to_json(const std::vector<CheckResult>& checks) {
  Json a = Json::array();
  for (const auto& c : checks) {
    Json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["value"] = number(c.value);
    j["tolerance"] = number(c.tolerance);
    j["detail"] = c.detail;
    a.push_back(j);
  }
  return a;
}

CsvTable csv_table(const HeraldRunResult& r) {
  CsvTable t;
  t.columns = {"t_ns", "n_a1", "n_a2", "n_b1", "n_b2", "classical_optical", "classical_mechanical"};
  t.units = {"ns", "", "", "", "", "", ""};
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    std::vector<std::string> row = {format_number(r.times[i])};
    for (double v : r.local_occupations[i]) row.push_back(format_number(v));
    row.push_back(format_number(r.classical_optical[i]));
    row.push_back(format_number(r.classical_mechanical[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable csv_table(const InterferenceResult& r) {
  CsvTable t;
  const bool other = !r.pattern_other_cavity.delays.empty();
  t.columns = {"delay_ns", "readout_time_ns", "intensity", "raw_intensity"};
  t.units = {"ns", "ns", "mean-normalized", "photons"};
  if (other) {
    t.columns.insert(t.columns.end(), {"intensity_other", "raw_intensity_other"});
    t.units.insert(t.units.end(), {"mean-normalized", "photons"});
  }
  t.columns.push_back("route");
  t.units.push_back("");
  for (std::size_t i = 0; i < r.pattern.delays.size(); ++i) {
    std::vector<std::string> row = {format_number(r.pattern.delays[i]),
                                    format_number(r.readout_times[i]),
                                    format_number(r.pattern.intensity[i]),
                                    format_number(r.raw_intensity[i])};
    if (other) {
      row.push_back(format_number(r.pattern_other_cavity.intensity[i]));
      row.push_back(format_number(r.raw_intensity_other[i]));
    }
    row.push_back(i < r.route_used.size() ? r.route_used[i] : "");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable csv_table(const std::vector<TemperaturePoint>& sweep) {
  CsvTable t;
  t.columns = {"temperature_K", "n_th", "negativity", "concurrence", "visibility",
               "raw_visibility", "fit_ok", "cutoff_b"};
  t.units = {"K", "", "", "", "", "", "", ""};
  for (const auto& p : sweep)
    t.rows.push_back({format_number(p.temperature), format_number(p.n_th),
                      format_number(p.negativity), format_number(p.concurrence),
                      format_number(p.visibility), format_number(p.raw_visibility),
                      p.fit_ok ? "1" : "0", std::to_string(p.cutoffs[2])});
  return t;
}

CsvTable csv_table(const std::vector<HeraldPoint>& scan) {
  CsvTable t;
  t.columns = {"herald_time_ns", "concurrence", "negativity", "herald_probability",
               "heralding_rate_mhz", "qubit_weight", "two_photon_contamination"};
  t.units = {"ns", "", "", "", "MHz", "", ""};
  for (const auto& p : scan)
    t.rows.push_back({format_number(p.time), format_number(p.concurrence),
                      format_number(p.negativity), format_number(p.probability),
                      format_number(p.rate_mhz), format_number(p.qubit_weight),
                      format_number(p.two_photon_contamination)});
  return t;
}

CsvTable csv_table(const std::vector<CheckResult>& checks) {
  CsvTable t;
  t.columns = {"check", "passed", "value", "tolerance"};
  t.units = {"", "", "", ""};
  for (const auto& c : checks)
    t.rows.push_back({c.name, c.passed ? "1" : "0", format_number(c.value),
                      format_number(c.tolerance)});
  return t;
}

void write_csv(std::ostream& os, const CsvTable& t, const Json& config_echo) {
  os << "# columns:";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << ' ' << t.columns[i];
    if (i < t.units.size() && !t.units[i].empty()) os << " [" << t.units[i] << ']';
    if (i + 1 < t.columns.size()) os << ';';
  }
  os << '\n';
  os << "# config: " << config_echo.dump() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << quote(row[i]);
    os << '\n';
  }
}

}  // namespace heraldsim
