#include "heraldsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "heraldsim/errors.hpp"

namespace heraldsim {

namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string shortest(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Failure {
  std::string message;
};

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw Failure{"empty value"};
  double v = 0.0;
  const char* b = t.data();
  const char* e = t.data() + t.size();
  if (*b == '+') ++b;
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw Failure{"not a number: '" + t + "'"};
  if (!std::isfinite(v)) throw Failure{"non-finite value: '" + t + "'"};
  return v;
}

// Splits "8.45 GHz" into (8.45, "ghz").
std::pair<double, std::string> number_and_unit(const std::string& text) {
  const std::string t = trim(text);
  std::size_t k = t.size();
  while (k > 0 && std::isalpha(static_cast<unsigned char>(t[k - 1]))) --k;
  return {parse_number(t.substr(0, k)), lower(trim(t.substr(k)))};
}

double parse_frequency(const std::string& text) {
  const auto [v, unit] = number_and_unit(text);
  double scale = 0.0;  // to GHz
  if (unit == "ghz") scale = 1.0;
  else if (unit == "mhz") scale = 1e-3;
  else if (unit == "khz") scale = 1e-6;
  else if (unit == "hz") scale = 1e-9;
  else if (unit.empty()) throw Failure{"frequency needs a unit (Hz, kHz, MHz, GHz)"};
  else throw Failure{"unknown frequency unit '" + unit + "'"};
  return ghz(v * scale);
}

double parse_time(const std::string& text) {
  const auto [v, unit] = number_and_unit(text);
  if (unit.empty() || unit == "ns") return v;
  if (unit == "us") return v * 1e3;
  if (unit == "ps") return v * 1e-3;
  throw Failure{"unknown time unit '" + unit + "'"};
}

double parse_temperature(const std::string& text) {
  const auto [v, unit] = number_and_unit(text);
  if (!unit.empty() && unit != "k") throw Failure{"temperature unit must be K"};
  return v;
}

bool parse_bool(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw Failure{"not a boolean: '" + trim(text) + "'"};
}

int parse_int(const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw Failure{"not an integer: '" + t + "'"};
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<double> time_grid(const std::string& text) {
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) return parse_grid(t);
  std::vector<double> out;
  for (const auto& item : split_list(t)) out.push_back(parse_time(item));
  return out;
}

struct PulseOverride {
  std::optional<double> t0, sigma, amplitude, detuning, phase;
};

struct Parsed {
  RunConfig run;
  PulseOverride write, read;
  std::optional<double> steps_per_ns;
  std::optional<double> dt;
};

typedef std::function<void(Parsed&, const std::string&)> Setter;

std::map<std::string, Setter> make_table() {
  std::map<std::string, Setter> t;
  auto P = [](Parsed& p) -> SystemParams& { return p.run.protocol.params; };
  auto C = [](Parsed& p) -> ProtocolConfig& { return p.run.protocol; };
  t["params.J_c"] = [=](Parsed& p, const std::string& v) { P(p).J_c = parse_frequency(v); };
  t["params.kappa_plus"] = [=](Parsed& p, const std::string& v) { P(p).kappa_plus = parse_frequency(v); };
  t["params.kappa_minus"] = [=](Parsed& p, const std::string& v) { P(p).kappa_minus = parse_frequency(v); };
  t["params.Omega_1"] = [=](Parsed& p, const std::string& v) { P(p).Omega_1 = parse_frequency(v); };
  t["params.Omega_2"] = [=](Parsed& p, const std::string& v) { P(p).Omega_2 = parse_frequency(v); };
  t["params.g"] = [=](Parsed& p, const std::string& v) { P(p).g = parse_frequency(v); };
  t["params.gamma"] = [=](Parsed& p, const std::string& v) { P(p).gamma = parse_frequency(v); };
  t["params.J_m"] = [=](Parsed& p, const std::string& v) { P(p).J_m = parse_frequency(v); };
  t["params.mechanical_coupling"] = [=](Parsed& p, const std::string& v) { P(p).mechanical_coupling = parse_bool(v); };
  t["params.temperature"] = [=](Parsed& p, const std::string& v) { P(p).temperature = parse_temperature(v); };
  for (const char* which : {"write", "read"}) {
    const std::string s = which;
    auto O = [s](Parsed& p) -> PulseOverride& { return s == "write" ? p.write : p.read; };
    if (s == "write") t[s + ".t0"] = [=](Parsed& p, const std::string& v) { O(p).t0 = parse_time(v); };
    t[s + ".sigma"] = [=](Parsed& p, const std::string& v) { O(p).sigma = parse_time(v); };
    t[s + ".amplitude"] = [=](Parsed& p, const std::string& v) { O(p).amplitude = parse_number(v); };
    t[s + ".detuning"] = [=](Parsed& p, const std::string& v) { O(p).detuning = parse_frequency(v); };
    t[s + ".phase"] = [=](Parsed& p, const std::string& v) { O(p).phase = parse_number(v); };
  }
  t["protocol.herald_time"] = [=](Parsed& p, const std::string& v) { C(p).herald_time = parse_time(v); };
  t["protocol.herald_cavity"] = [=](Parsed& p, const std::string& v) { C(p).herald_cavity = parse_int(v); };
  t["protocol.herald_frame"] = [=](Parsed& p, const std::string& v) {
    const std::string f = lower(trim(v));
    if (f == "fluctuation") C(p).herald_frame = HeraldFrame::Fluctuation;
    else if (f == "full") C(p).herald_frame = HeraldFrame::Full;
    else throw Failure{"herald_frame must be 'fluctuation' or 'full'"};
  };
  t["protocol.allow_early_herald"] = [=](Parsed& p, const std::string& v) { C(p).allow_early_herald = parse_bool(v); };
  t["protocol.allow_detuning_override"] = [=](Parsed& p, const std::string& v) { C(p).allow_detuning_override = parse_bool(v); };
  t["protocol.readout_base_delay"] = [=](Parsed& p, const std::string& v) { C(p).readout_base_delay = parse_time(v); };
  t["protocol.delays"] = [=](Parsed& p, const std::string& v) { C(p).delays = time_grid(v); };
  t["protocol.readout_offset"] = [=](Parsed& p, const std::string& v) {
    if (lower(trim(v)) == "auto") C(p).readout_offset.reset();
    else C(p).readout_offset = parse_time(v);
  };
  t["protocol.readout_cavity"] = [=](Parsed& p, const std::string& v) { C(p).readout_cavity = parse_int(v); };
  t["protocol.readout_both_cavities"] = [=](Parsed& p, const std::string& v) { C(p).readout_both_cavities = parse_bool(v); };
  t["protocol.route"] = [=](Parsed& p, const std::string& v) {
    const std::string r = lower(trim(v));
    if (r == "adjoint") C(p).route = ReadoutRoute::Adjoint;
    else if (r == "direct") C(p).route = ReadoutRoute::Direct;
    else throw Failure{"route must be 'adjoint' or 'direct'"};
  };
  t["protocol.direct_runs"] = [=](Parsed& p, const std::string& v) {
    C(p).direct_runs.clear();
    for (const auto& item : split_list(v)) C(p).direct_runs.push_back(parse_int(item));
  };
  t["protocol.zero_coherences"] = [=](Parsed& p, const std::string& v) { C(p).zero_coherences = parse_bool(v); };
  t["protocol.temperatures"] = [=](Parsed& p, const std::string& v) {
    C(p).temperatures.clear();
    if (v.find(':') != std::string::npos) {
      C(p).temperatures = parse_grid(v);
      return;
    }
    for (const auto& item : split_list(v)) C(p).temperatures.push_back(parse_temperature(item));
  };
  t["protocol.scan_times"] = [=](Parsed& p, const std::string& v) { C(p).scan_times = time_grid(v); };
  t["numerics.cutoffs"] = [=](Parsed& p, const std::string& v) {
    const auto items = split_list(v);
    if (items.size() != 4) throw Failure{"cutoffs needs 4 integers (a+, a-, b+, b-)"};
    for (int k = 0; k < 4; ++k) C(p).cutoffs[k] = parse_int(items[k]);
  };
  t["numerics.dt"] = [=](Parsed& p, const std::string& v) { p.dt = parse_time(v); };
  t["numerics.steps_per_ns"] = [=](Parsed& p, const std::string& v) { p.steps_per_ns = parse_number(v); };
  t["numerics.stride"] = [=](Parsed& p, const std::string& v) { C(p).stride = parse_int(v); };
  t["numerics.free_stride"] = [=](Parsed& p, const std::string& v) { C(p).free_stride = parse_int(v); };
  t["numerics.quiet_threshold"] = [=](Parsed& p, const std::string& v) { C(p).quiet_threshold = parse_frequency(v); };
  t["numerics.thermal_tail"] = [=](Parsed& p, const std::string& v) { C(p).thermal_tail = parse_number(v); };
  t["run.output_dir"] = [](Parsed& p, const std::string& v) { p.run.output_dir = trim(v); };
  t["run.formats"] = [](Parsed& p, const std::string& v) {
    const std::string f = lower(trim(v));
    p.run.write_csv = f == "csv" || f == "both" || f == "csv,json" || f == "json,csv";
    p.run.write_json = f == "json" || f == "both" || f == "csv,json" || f == "json,csv";
    if (!p.run.write_csv && !p.run.write_json) throw Failure{"formats must be csv, json or both"};
  };
  t["run.workers"] = [](Parsed& p, const std::string& v) { p.run.workers = parse_int(v); };
  t["run.seed"] = [](Parsed& p, const std::string& v) { p.run.seed = static_cast<std::uint64_t>(parse_int(v)); };
  t["run.convergence_check"] = [](Parsed& p, const std::string& v) { p.run.convergence_check = parse_bool(v); };
  return t;
}

const std::map<std::string, Setter>& table() {
  static const std::map<std::string, Setter> t = make_table();
  return t;
}

void apply(Parsed& p, const std::string& section, const std::string& key, const std::string& value,
           const std::string& where) {
  const std::string full = section + "." + key;
  auto it = table().find(full);
  if (it == table().end()) throw ConfigError(where + ": unknown key '" + full + "'");
  try {
    it->second(p, value);
  } catch (const Failure& f) {
    throw ConfigError(where + ": " + full + ": " + f.message);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + full + ": " + e.what());
  }
}

RunConfig resolve(Parsed& p, const std::string& origin) {
  ProtocolConfig& c = p.run.protocol;
  const SystemParams& sp = c.params;
  if (p.dt && p.steps_per_ns) throw ConfigError(origin + ": give either numerics.dt or numerics.steps_per_ns");
  if (p.dt) c.dt = *p.dt;
  if (p.steps_per_ns) {
    if (!(*p.steps_per_ns > 0.0)) throw ConfigError(origin + ": numerics.steps_per_ns must be positive");
    c.dt = 1.0 / *p.steps_per_ns;
  }
  auto fill = [&](PulseSpec& ps, const PulseOverride& o, double amp_kappa, double det) {
    if (o.t0) ps.t0 = *o.t0;
    ps.sigma = o.sigma.value_or(ps.sigma);
    ps.amplitude = o.amplitude.value_or(amp_kappa) * sp.kappa_minus;
    ps.detuning = o.detuning.value_or(det);
    ps.phase = o.phase.value_or(ps.phase);
  };
  fill(c.write, p.write, 1e3, sp.J_c + sp.Omega_plus());
  fill(c.read, p.read, 5e3, sp.J_c - sp.Omega_plus());
  try {
    c.validate();
  } catch (const SimError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (p.run.workers < 1) throw ConfigError(origin + ": run.workers must be >= 1");
  if (p.run.output_dir.empty()) throw ConfigError(origin + ": run.output_dir is empty");
  return p.run;
}

std::string json_scalar(const nlohmann::json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return shortest(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ", ";
      out += json_scalar(item, where);
    }
    return out;
  }
  throw ConfigError(where + ": unsupported JSON value");
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const std::string s = trim(text);
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ':')) parts.push_back(trim(cur));
  if (parts.size() != 3) throw std::invalid_argument("grid '" + s + "' must look like start:stop:count");
  double a = 0.0, b = 0.0;
  int n = 0;
  try {
    a = parse_time(parts[0]);
    b = parse_time(parts[1]);
    n = parse_int(parts[2]);
  } catch (const Failure& f) {
    throw std::invalid_argument("grid '" + s + "': " + f.message);
  }
  if (n < 1) throw std::invalid_argument("grid '" + s + "': count must be >= 1");
  if (n == 1) return {a};
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = a + (b - a) * k / (n - 1);
  return out;
}

namespace {

void apply_overrides(Parsed& p, const std::vector<ConfigOverride>& overrides) {
  for (const auto& o : overrides) {
    const auto dot = o.key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == o.key.size())
      throw ConfigError("override '" + o.key + "': expected section.key");
    apply(p, o.key.substr(0, dot), o.key.substr(dot + 1), o.value, "override " + o.key);
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            const std::vector<ConfigOverride>& overrides) {
  Parsed p;
  const std::string head = trim(text);
  if (!head.empty() && head.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(origin + ": JSON parse error: " + e.what());
    }
    for (auto sec = j.begin(); sec != j.end(); ++sec) {
      if (!sec.value().is_object())
        throw ConfigError(origin + ": top-level entry '" + sec.key() + "' must be a section object");
      for (auto kv = sec.value().begin(); kv != sec.value().end(); ++kv) {
        const std::string where = origin + ": /" + sec.key() + "/" + kv.key();
        apply(p, sec.key(), kv.key(), json_scalar(kv.value(), where), where);
      }
    }
    apply_overrides(p, overrides);
    return resolve(p, origin);
  }
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    if (section.empty()) throw ConfigError(where + ": key outside any [section]");
    apply(p, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
  apply_overrides(p, overrides);
  return resolve(p, origin);
}

RunConfig parse_config(const std::filesystem::path& path,
                       const std::vector<ConfigOverride>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string(), overrides);
}

nlohmann::ordered_json config_to_json(const RunConfig& rc) {
  const ProtocolConfig& c = rc.protocol;
  const SystemParams& p = c.params;
  auto f = [](double w, const char* unit, double scale) {
    return shortest(to_ghz(w) / scale) + " " + unit;
  };
  auto gh = [&](double w) { return f(w, "GHz", 1.0); };
  auto mh = [&](double w) { return f(w, "MHz", 1e-3); };
  auto kh = [&](double w) { return f(w, "kHz", 1e-6); };
  auto ns = [](double t) { return shortest(t) + " ns"; };
  auto list = [&](const std::vector<double>& v, bool time) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (double x : v) a.push_back(time ? ns(x) : shortest(x));
    return a;
  };
  nlohmann::ordered_json j;
  j["params"] = {{"J_c", gh(p.J_c)},
                 {"kappa_plus", mh(p.kappa_plus)},
                 {"kappa_minus", mh(p.kappa_minus)},
                 {"Omega_1", gh(p.Omega_1)},
                 {"Omega_2", gh(p.Omega_2)},
                 {"g", mh(p.g)},
                 {"gamma", kh(p.gamma)},
                 {"temperature", shortest(p.temperature) + " K"},
                 {"mechanical_coupling", p.mechanical_coupling},
                 {"J_m", kh(p.J_m)}};
  auto pulse = [&](const PulseSpec& s, bool with_t0) {
    nlohmann::ordered_json o;
    if (with_t0) o["t0"] = ns(s.t0);
    o["sigma"] = ns(s.sigma);
    o["amplitude"] = shortest(s.amplitude / p.kappa_minus);
    o["detuning"] = gh(s.detuning);
    o["phase"] = shortest(s.phase);
    return o;
  };
  j["write"] = pulse(c.write, true);
  j["read"] = pulse(c.read, false);
  nlohmann::ordered_json pr;
  pr["herald_time"] = ns(c.herald_time);
  pr["herald_cavity"] = c.herald_cavity;
  pr["herald_frame"] = c.herald_frame == HeraldFrame::Full ? "full" : "fluctuation";
  pr["allow_early_herald"] = c.allow_early_herald;
  pr["allow_detuning_override"] = c.allow_detuning_override;
  pr["readout_base_delay"] = ns(c.readout_base_delay);
  pr["delays"] = list(c.delays, true);
  pr["readout_offset"] = c.readout_offset ? ns(*c.readout_offset) : std::string("auto");
  pr["readout_cavity"] = c.readout_cavity;
  pr["readout_both_cavities"] = c.readout_both_cavities;
  pr["route"] = c.route == ReadoutRoute::Direct ? "direct" : "adjoint";
  pr["direct_runs"] = c.direct_runs;
  pr["zero_coherences"] = c.zero_coherences;
  pr["temperatures"] = list(c.temperatures, false);
  pr["scan_times"] = list(c.scan_times, true);
  j["protocol"] = pr;
  j["numerics"] = {{"cutoffs", c.cutoffs},
                   {"dt", ns(c.dt)},
                   {"stride", c.stride},
                   {"free_stride", c.free_stride},
                   {"quiet_threshold", mh(c.quiet_threshold)},
                   {"thermal_tail", shortest(c.thermal_tail)}};
  j["run"] = {{"output_dir", rc.output_dir},
              {"formats", rc.write_csv && rc.write_json ? "both" : (rc.write_csv ? "csv" : "json")},
              {"workers", rc.workers},
              {"seed", rc.seed},
              {"convergence_check", rc.convergence_check}};
  return j;
}

int resolve_workers(int configured) {
  if (const char* env = std::getenv("HERALD_SIM_WORKERS")) {
    try {
      const int w = parse_int(env);
      if (w < 1) throw Failure{"must be >= 1"};
      return w;
    } catch (const Failure& f) {
      throw ConfigError(std::string("HERALD_SIM_WORKERS: ") + f.message);
    }
  }
  return std::max(1, configured);
}

}  // namespace heraldsim
