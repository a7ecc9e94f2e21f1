#include "heraldsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "heraldsim/errors.hpp"

namespace heraldsim {

namespace {

constexpr double kWindowSigmas = 8.0;
constexpr double kSampleSpacing = 0.25;  // ns, occupation sampling target
constexpr double kOffsetMargin = 10.0;   // ns past the classical/quantum crossing

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

double quantum_step(const ProtocolConfig& c) { return c.stride * c.dt; }

ModeLayout layout_for(const std::array<int, 4>& c) { return ModeLayout::canonical(c[0], c[1], c[2], c[3]); }

DensityMatrix initial_state(const ProtocolConfig& config, const std::array<int, 4>& cut) {
  const double n = config.params.n_th();
  auto vac = [](ModeLabel label, int c) { return thermal_state(0.0, c, label); };
  DensityMatrix rho = tensor(vac(ModeLabel::APlus, cut[0]), vac(ModeLabel::AMinus, cut[1]));
  rho = tensor(rho, thermal_state(n, cut[2], ModeLabel::BPlus, config.thermal_tail));
  rho = tensor(rho, thermal_state(n, cut[3], ModeLabel::BMinus, config.thermal_tail));
  return rho;
}

EvolveOptions evolve_options(const ProtocolConfig& c) {
  EvolveOptions o;
  o.stride = c.stride;
  o.free_stride = c.free_stride;
  o.quiet_threshold = c.quiet_threshold;
  o.keep_snapshots = false;
  return o;
}

// Local occupation operator of cavity 1 or 2 in the canonical layout.
DenseMatrix local_cavity_number(const ModeLayout& l, int cavity) {
  const DenseMatrix ap = embed(destroy(l.cutoff(ModeLabel::APlus)), ModeLabel::APlus, l).matrix;
  const DenseMatrix am = embed(destroy(l.cutoff(ModeLabel::AMinus)), ModeLabel::AMinus, l).matrix;
  const DenseMatrix a = (cavity == 1 ? DenseMatrix(ap + am) : DenseMatrix(ap - am)) / std::sqrt(2.0);
  return a.adjoint() * a;
}

double local_classical(const ClassicalAmplitudes& c, int cavity) {
  const auto [a1, a2] = local_from_normal(c.alpha_plus, c.alpha_minus);
  return std::norm(cavity == 1 ? a1 : a2);
}

ClassicalAmplitudes amplitudes_at(const ClassicalTrajectory& tr, double t) {
  const long idx = tr.grid_index(t);
  return idx >= 0 ? tr.at(static_cast<std::size_t>(idx)) : tr.interpolate(t);
}

ClassicalAmplitudes negated(const ClassicalAmplitudes& c) {
  return {-c.alpha_plus, -c.alpha_minus, -c.beta_plus, -c.beta_minus};
}

struct StateCheck {
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  double max_herm = 0.0;

  void operator()(const DensityMatrix& s, double t) {
    const double ev = s.min_eigenvalue();
    min_eigenvalue = std::min(min_eigenvalue, ev);
    max_herm = std::max(max_herm, s.hermiticity_error());
    if (ev < -1e-6) {
      std::ostringstream os;
      os << "density matrix eigenvalue " << ev << " below -1e-06 at t = " << t << " ns";
      throw PositivityFailure(os.str());
    }
  }
};

// With `tolerant`, a qubit block that is not positive to 1e-8 (integrator
// error relative to a tiny herald probability) yields NaN concurrence.
HeraldPoint point_from(const HeraldedState& h, const SystemParams& p, bool tolerant = false) {
  HeraldPoint pt;
  pt.time = h.herald_time;
  try {
    pt.concurrence = concurrence(h.rho_qubit);
  } catch (const InvalidState&) {
    if (!tolerant) throw;
    pt.concurrence = std::numeric_limits<double>::quiet_NaN();
  }
  pt.negativity = negativity(h.rho_mech);
  pt.probability = h.herald_probability;
  pt.rate_mhz = heralding_rate(0.5 * (p.kappa_plus + p.kappa_minus), h.herald_probability);
  pt.qubit_weight = h.qubit_weight;
  pt.two_photon_contamination = h.two_photon_contamination;
  return pt;
}

// First crossing of quantum above classical (and above the 1e-12 floor).
double first_crossing(const std::vector<double>& t, const std::vector<double>& q,
                      const std::vector<double>& c) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (q[i] > 1e-12 && q[i] > c[i]) return t[i];
  return -1.0;
}

// The write stage: classical write-only trajectory, quantum evolution up to
// the herald time, herald and metrics. The propagator is left at t_H.
struct WriteStage {
  ClassicalTrajectory classical;
  std::unique_ptr<Propagator> prop;
  DensityMatrix rho_at_herald;
  HeraldRunResult result;
};

WriteStage write_stage(const ProtocolConfig& config, double classical_end,
                       const std::vector<double>& scan, bool enforce_tq, bool herald_now) {
  WriteStage ws;
  HeraldRunResult& res = ws.result;
  const auto cut = effective_cutoffs(config);
  res.cutoffs = cut;
  const ModeLayout layout = layout_for(cut);
  const double t_h = config.herald_time;
  double t_last = t_h;
  for (double t : scan) t_last = std::max(t_last, t);
  ws.classical = integrate_classical(config.params, {config.write}, std::max(classical_end, t_last),
                                     config.dt);

  const double hq = quantum_step(config);
  const long every = std::max<long>(1, std::lround(kSampleSpacing / hq));
  std::vector<double> samples;
  for (long n = every; static_cast<double>(n) * hq <= t_last + 1e-9 * hq; n += every)
    samples.push_back(static_cast<double>(n) * hq);
  for (double t : scan) samples.push_back(t);
  samples.push_back(t_h);
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end(),
                            [&](double a, double b) { return std::abs(a - b) <= 1e-9 * hq; }),
                samples.end());
  for (double s : samples) {
    if (s < 0.0) throw std::invalid_argument("herald time before the start of the simulation");
  }

  ws.prop = std::make_unique<Propagator>(ws.classical, config.params,
                                         BathSpec::from_params(config.params), layout,
                                         evolve_options(config));
  ws.prop->reset(initial_state(config, cut), 0.0);

  StateCheck check;
  std::vector<double> qm, qo, qt, cm, co, ct;
  std::size_t next_scan = 0;
  std::vector<double> scan_sorted = scan;
  std::sort(scan_sorted.begin(), scan_sorted.end());
  const long check_every = std::max<long>(1, std::lround(1.0 / (every * hq)));
  long sample_count = 0;
  for (double s : samples) {
    ws.prop->advance_to(s);
    const DensityMatrix st = ws.prop->state();
    const bool is_scan = next_scan < scan_sorted.size() && std::abs(scan_sorted[next_scan] - s) <= 1e-9 * hq;
    const bool is_herald = std::abs(s - t_h) <= 1e-9 * hq;
    if (++sample_count % check_every == 0 || is_scan || is_herald) check(st, s);
    const auto loc = local_occupations(st);
    const ClassicalAmplitudes ca = amplitudes_at(ws.classical, s);
    const double c_opt = std::norm(ca.alpha_plus) + std::norm(ca.alpha_minus);
    const double c_mech = std::norm(ca.beta_plus) + std::norm(ca.beta_minus);
    res.times.push_back(s);
    res.local_occupations.push_back(loc);
    res.classical_optical.push_back(c_opt);
    res.classical_mechanical.push_back(c_mech);
    qo.push_back(loc[0] + loc[1]);
    qm.push_back(loc[2] + loc[3]);
    qt.push_back(qo.back() + qm.back());
    co.push_back(c_opt);
    cm.push_back(c_mech);
    ct.push_back(c_opt + c_mech);
    while (is_scan && next_scan < scan_sorted.size() &&
           std::abs(scan_sorted[next_scan] - s) <= 1e-9 * hq) {
      HeraldPoint pt;
      pt.time = s;
      try {
        pt = point_from(herald_at(st, ws.classical, s, config.herald_cavity, config.herald_frame),
                        config.params, true);
      } catch (const ZeroProbabilityHerald&) {
        pt.time = s;
      }
      res.series.push_back(pt);
      ++next_scan;
    }
    if (is_herald) {
      ws.rho_at_herald = st;
    }
  }
  res.t_q = first_crossing(res.times, qm, cm);
  res.t_q_optical = first_crossing(res.times, qo, co);
  res.t_q_total = first_crossing(res.times, qt, ct);
  res.herald_time = t_h;
  res.diagnostics.dimension = layout.total_dim();
  res.diagnostics.quantum_step_ns = hq;
  res.diagnostics.quantum_steps = ws.prop->steps_taken();
  res.diagnostics.max_trace_drift = ws.prop->max_trace_drift();
  res.diagnostics.min_eigenvalue = check.min_eigenvalue;
  res.diagnostics.max_hermiticity_error = check.max_herm;

  if (!herald_now) return ws;
  if (enforce_tq && !config.allow_early_herald && (res.t_q < 0.0 || t_h < res.t_q)) {
    std::ostringstream os;
    os << "herald time " << t_h << " ns precedes t_q = " << res.t_q
       << " ns; set allow_early_herald to override";
    throw ProtocolViolation(os.str());
  }
  const HeraldedState h =
      herald_at(ws.rho_at_herald, ws.classical, t_h, config.herald_cavity, config.herald_frame);
  const HeraldPoint pt = point_from(h, config.params);
  res.concurrence = pt.concurrence;
  res.negativity = pt.negativity;
  res.qubit_negativity = negativity(h.rho_qubit);
  res.fidelity = bell_fidelity_max(h.rho_qubit);
  res.herald_probability = h.herald_probability;
  res.heralding_rate_mhz = pt.rate_mhz;
  res.two_photon_contamination = h.two_photon_contamination;
  res.qubit_weight = h.qubit_weight;
  res.rho_qubit = h.rho_qubit;
  res.diagonal_imbalance = (h.rho_qubit(2, 2) - h.rho_qubit(1, 1)).real();
  res.herald = h;
  return ws;
}

// Heralded fluctuation state in the canonical layout, ready for propagation.
DensityMatrix post_herald_state(const ProtocolConfig& config, const WriteStage& ws) {
  if (config.herald_frame == HeraldFrame::Full) {
    const ClassicalAmplitudes c = amplitudes_at(ws.classical, config.herald_time);
    const ReconstructedState full = reconstruct_full(ws.rho_at_herald, c);
    const DensityMatrix proj = project_in_normal_basis(full.rho, config.herald_cavity);
    return reconstruct_full(proj, negated(c)).rho;
  }
  return project_in_normal_basis(ws.rho_at_herald, config.herald_cavity);
}

// Tr[U M U^dag rho] with U = exp(-i theta N_opt).
double rotated_expectation(const DenseMatrix& m, const DensityMatrix& rho, double theta) {
  const ModeLayout& l = rho.layout();
  const int dim = l.total_dim();
  std::vector<Complex> ph(dim);
  for (int i = 0; i < dim; ++i) {
    const int n = l.occupation(i, ModeLabel::APlus) + l.occupation(i, ModeLabel::AMinus);
    ph[i] = std::polar(1.0, -theta * n);
  }
  Complex acc{0.0, 0.0};
  const DenseMatrix& r = rho.matrix();
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) acc += m(a, b) * ph[a] * std::conj(ph[b]) * r(b, a);
  return acc.real();
}

}  // namespace

void ProtocolConfig::validate() const {
  for (const std::string& w : params.validate()) (void)w;
  write.validate();
  read.validate();
  if (herald_cavity != 1 && herald_cavity != 2) throw std::invalid_argument("herald_cavity must be 1 or 2");
  if (readout_cavity != 1 && readout_cavity != 2) throw std::invalid_argument("readout_cavity must be 1 or 2");
  for (int c : cutoffs)
    if (c < 2) throw std::invalid_argument("cutoffs must be >= 2");
  if (cutoffs[0] != cutoffs[1]) throw std::invalid_argument("cutoffs: optical cutoffs must be equal");
  if (cutoffs[2] != cutoffs[3]) throw std::invalid_argument("cutoffs: mechanical cutoffs must be equal");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (dt > max_time_step(params) * (1.0 + 1e-9)) throw std::invalid_argument("dt exceeds the stability bound");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (free_stride < stride) throw std::invalid_argument("free_stride must be >= stride");
  if (!(quiet_threshold >= 0.0)) throw std::invalid_argument("quiet_threshold must be >= 0");
  if (!(thermal_tail > 0.0 && thermal_tail < 1.0)) throw std::invalid_argument("thermal_tail must lie in (0, 1)");
  if (!(herald_time >= 0.0)) throw std::invalid_argument("herald_time must be >= 0");
  if (!allow_detuning_override) {
    const double stokes = params.J_c + params.Omega_plus();
    const double anti = params.J_c - params.Omega_plus();
    if (!close_rel(write.detuning, stokes))
      throw ProtocolViolation("write detuning differs from J_c + Omega_plus; set allow_detuning_override");
    if (!close_rel(read.detuning, anti))
      throw ProtocolViolation("read detuning differs from J_c - Omega_plus; set allow_detuning_override");
  }
  if (herald_time < write.t0 && !allow_early_herald)
    throw ProtocolViolation("herald time precedes the write pulse centre");
  for (double d : delays) {
    const double t_r = write.t0 + readout_base_delay + d;
    if (t_r - kWindowSigmas * read.sigma <= herald_time)
      throw ProtocolViolation("readout window starts before the herald for delay " + std::to_string(d));
  }
  if (readout_offset && !(*readout_offset > -kWindowSigmas * read.sigma))
    throw std::invalid_argument("readout_offset must lie after the start of the readout window");
  for (std::size_t i = 0; i < temperatures.size(); ++i) {
    if (!(temperatures[i] >= 0.0)) throw std::invalid_argument("temperatures must be >= 0");
    if (i > 0 && !(temperatures[i] > temperatures[i - 1]))
      throw std::invalid_argument("temperatures must be strictly ascending");
  }
}

ProtocolConfig default_config() {
  ProtocolConfig c;
  const SystemParams& p = c.params;
  c.write = {30.0, 3.85, 1e3 * p.kappa_minus, p.J_c + p.Omega_plus(), 0.0};
  c.read = {0.0, 3.85, 5e3 * p.kappa_minus, p.J_c - p.Omega_plus(), 0.0};
  // 8 samples per 2 pi / Delta Omega = 20 ns period over 150 ns.
  for (int k = 0; k <= 60; ++k) c.delays.push_back(2.5 * k);
  c.temperatures = {0.0, 0.05, 0.1, 0.15, 0.2, 0.3};
  return c;
}

std::array<int, 4> effective_cutoffs(const ProtocolConfig& config) {
  std::array<int, 4> c = config.cutoffs;
  const double n = config.params.n_th();
  if (n > 0.0) {
    const int need = thermal_cutoff(n, config.thermal_tail);
    c[2] = std::max(c[2], need);
    c[3] = std::max(c[3], need);
  }
  return c;
}

HeraldRunResult run_write_herald(const ProtocolConfig& config) {
  config.validate();
  std::vector<double> scan;
  for (double t = 1.0; t <= config.herald_time + 1e-9; t += 1.0) scan.push_back(t);
  return write_stage(config, config.herald_time, scan, true, true).result;
}

std::vector<HeraldPoint> scan_herald_time(const ProtocolConfig& config,
                                          const std::vector<double>& t_grid) {
  ProtocolConfig c = config;
  c.allow_early_herald = true;
  c.validate();
  if (t_grid.empty()) throw std::invalid_argument("scan_herald_time: empty grid");
  for (double t : t_grid)
    if (!(t > 0.0)) throw std::invalid_argument("scan_herald_time: grid times must be positive");
  c.herald_time = *std::max_element(t_grid.begin(), t_grid.end());
  WriteStage ws = write_stage(c, c.herald_time, t_grid, false, false);
  // Restore input order.
  std::vector<HeraldPoint> out;
  for (double t : t_grid) {
    for (const HeraldPoint& p : ws.result.series)
      if (std::abs(p.time - t) <= 1e-9 * std::max(1.0, t)) {
        out.push_back(p);
        break;
      }
  }
  return out;
}

namespace {

InterferenceResult interference_impl(const ProtocolConfig& config, HeraldRunResult* herald_out) {
  config.validate();
  if (config.delays.empty()) throw std::invalid_argument("run_interference: no delays");
  const SystemParams& p = config.params;
  const double d_omega = std::abs(p.Omega_2 - p.Omega_1);
  InterferenceResult out;
  out.expected_period = d_omega > 0.0 ? 2.0 * std::numbers::pi / d_omega : 0.0;
  {
    const auto [mn, mx] = std::minmax_element(config.delays.begin(), config.delays.end());
    if (d_omega > 0.0 && *mx - *mn < out.expected_period * (1.0 - 1e-9)) {
      std::ostringstream os;
      os << "run_interference: delays span " << (*mx - *mn) << " ns, less than one period "
         << out.expected_period << " ns";
      throw std::invalid_argument(os.str());
    }
  }
  const double hq = quantum_step(config);
  const double lead = std::ceil(kWindowSigmas * config.read.sigma / hq - 1e-9) * hq;
  const std::size_t nd = config.delays.size();
  std::vector<double> t_r(nd), t_s(nd);
  for (std::size_t k = 0; k < nd; ++k) {
    t_r[k] = config.write.t0 + config.readout_base_delay + config.delays[k];
    t_s[k] = t_r[k] - lead;
  }
  out.readout_times = t_r;
  const double t_s_max = *std::max_element(t_s.begin(), t_s.end());

  WriteStage ws = write_stage(config, t_s_max, {}, true, true);
  if (herald_out) *herald_out = ws.result;
  out.herald_probability = ws.result.herald_probability;
  out.concurrence = ws.result.concurrence;

  DensityMatrix rho_h = post_herald_state(config, ws);
  if (config.zero_coherences) rho_h = dephase_local_mechanics(rho_h);
  const ModeLayout& layout = rho_h.layout();
  const BathSpec baths = BathSpec::from_params(p);
  const EvolveOptions opts = evolve_options(config);

  // Reference readout run, read pulse of delay 0.
  auto readout_classical = [&](std::size_t k, double t_end) {
    PulseSpec rd = config.read;
    rd.t0 = t_r[k];
    return integrate_classical(p, {config.write, rd}, t_end, config.dt,
                               amplitudes_at(ws.classical, t_s[k]), t_s[k]);
  };
  const int cav = config.readout_cavity;
  double offset = 0.0;
  if (config.readout_offset) {
    offset = *config.readout_offset;
  } else {
    const auto mo = normal_occupations(DensityMatrix(layout, rho_h.matrix()));
    const double level = mo[2] + mo[3];
    const ClassicalTrajectory probe = readout_classical(0, t_r[0] + kWindowSigmas * config.read.sigma);
    double last = t_r[0];
    for (std::size_t i = 0; i < probe.size(); ++i)
      if (probe.time(i) >= t_r[0] && local_classical(probe.at(i), cav) >= level) last = probe.time(i);
    offset = (last - t_r[0]) + kOffsetMargin;
  }
  out.readout_offset = offset;
  std::vector<double> t_e(nd);
  for (std::size_t k = 0; k < nd; ++k) t_e[k] = t_r[k] + offset;

  const double write_end = config.write.t0 + kWindowSigmas * config.write.sigma;
  const double margin = 10.0 / std::min(p.kappa_plus, p.kappa_minus);
  std::vector<bool> direct(nd, config.route == ReadoutRoute::Direct);
  for (std::size_t k = 0; k < nd; ++k)
    if (t_s[k] < write_end + margin) direct[k] = true;
  for (int k : config.direct_runs)
    if (k >= 0 && static_cast<std::size_t>(k) < nd) direct[k] = true;

  const DenseMatrix n_c = local_cavity_number(layout, cav);
  const DenseMatrix n_o = local_cavity_number(layout, 3 - cav);
  const bool other = config.readout_both_cavities;

  // Heisenberg-evolved observables over the reference window.
  const ClassicalTrajectory ref = readout_classical(0, t_e[0]);
  out.classical_intensity = local_classical(ref.at(ref.size() - 1), cav);
  DenseMatrix m_c, m_o;
  const bool need_adjoint = std::find(direct.begin(), direct.end(), false) != direct.end() ||
                            !config.direct_runs.empty();
  if (need_adjoint) {
    Propagator back(ref, p, baths, layout, opts);
    m_c = back.evolve_observable_backward(n_c, t_e[0], t_s[0]);
    if (other) m_o = back.evolve_observable_backward(n_o, t_e[0], t_s[0]);
  }

  // Free evolution from the herald through every window start.
  std::vector<std::size_t> order(nd);
  for (std::size_t k = 0; k < nd; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t_s[a] < t_s[b]; });
  Propagator& free_prop = *ws.prop;
  free_prop.reset(rho_h, config.herald_time);
  StateCheck check;
  check.min_eigenvalue = ws.result.diagnostics.min_eigenvalue;
  check.max_herm = ws.result.diagnostics.max_hermiticity_error;
  double drift = ws.result.diagnostics.max_trace_drift;
  long steps = ws.result.diagnostics.quantum_steps;

  out.raw_intensity.assign(nd, 0.0);
  out.raw_intensity_other.assign(nd, 0.0);
  out.route_used.assign(nd, "adjoint");
  double max_disc = 0.0, max_int = 0.0;
  const double delta_r = config.read.detuning;
  for (std::size_t k : order) {
    free_prop.advance_to(t_s[k]);
    const DensityMatrix rho_s = free_prop.state();
    check(rho_s, t_s[k]);
    const double tau = t_r[k] - t_r[0];
    double adj_c = 0.0, adj_o = 0.0;
    if (need_adjoint) {
      adj_c = rotated_expectation(m_c, rho_s, delta_r * tau);
      if (other) adj_o = rotated_expectation(m_o, rho_s, delta_r * tau);
    }
    if (direct[k]) {
      const ClassicalTrajectory ck = readout_classical(k, t_e[k]);
      Propagator fwd(ck, p, baths, layout, opts);
      fwd.reset(rho_s, t_s[k]);
      ReadoutSeries rs;
      rs.delay_index = static_cast<int>(k);
      const long every = std::max<long>(1, std::lround(kSampleSpacing / hq));
      std::vector<double> ts;
      for (long n = every; t_s[k] + static_cast<double>(n) * hq < t_e[k] - 1e-9 * hq; n += every)
        ts.push_back(t_s[k] + static_cast<double>(n) * hq);
      ts.push_back(t_e[k]);
      DensityMatrix last;
      for (double t : ts) {
        fwd.advance_to(t);
        last = fwd.state();
        const auto loc = local_occupations(last);
        rs.times.push_back(t);
        rs.intensity.push_back(cav == 1 ? loc[0] : loc[1]);
        rs.classical.push_back(local_classical(amplitudes_at(ck, t), cav));
        rs.mechanical.push_back(loc[2] + loc[3]);
      }
      check(last, t_e[k]);
      drift = std::max(drift, fwd.max_trace_drift());
      steps += fwd.steps_taken();
      const auto loc = local_occupations(last);
      const double dir_c = cav == 1 ? loc[0] : loc[1];
      const double dir_o = cav == 1 ? loc[1] : loc[0];
      if (need_adjoint && !(t_s[k] < write_end + margin)) {
        max_disc = std::max(max_disc, std::abs(dir_c - adj_c));
        if (other) max_disc = std::max(max_disc, std::abs(dir_o - adj_o));
      }
      out.raw_intensity[k] = dir_c;
      out.raw_intensity_other[k] = dir_o;
      out.route_used[k] = "direct";
      out.series.push_back(std::move(rs));
    } else {
      out.raw_intensity[k] = adj_c;
      out.raw_intensity_other[k] = adj_o;
    }
    max_int = std::max(max_int, std::abs(out.raw_intensity[k]));
  }
  drift = std::max(drift, free_prop.max_trace_drift());
  steps += free_prop.steps_taken();
  out.route_discrepancy = max_int > 0.0 ? max_disc / max_int : 0.0;
  std::sort(out.series.begin(), out.series.end(),
            [](const ReadoutSeries& a, const ReadoutSeries& b) { return a.delay_index < b.delay_index; });

  auto make_pattern = [&](const std::vector<double>& raw) {
    FringePattern fp;
    fp.delays = config.delays;
    fp.readout_offset = offset;
    double mean = 0.0;
    for (double v : raw) mean += v;
    mean /= static_cast<double>(raw.size());
    for (double v : raw) fp.intensity.push_back(mean > 0.0 ? v / mean : v);
    return fp;
  };
  out.pattern = make_pattern(out.raw_intensity);
  out.fit = visibility(out.pattern, d_omega);
  if (other) {
    out.pattern_other_cavity = make_pattern(out.raw_intensity_other);
    out.fit_other = visibility(out.pattern_other_cavity, d_omega);
  }
  out.diagnostics.dimension = layout.total_dim();
  out.diagnostics.quantum_step_ns = hq;
  out.diagnostics.quantum_steps = steps;
  out.diagnostics.max_trace_drift = drift;
  out.diagnostics.min_eigenvalue = check.min_eigenvalue;
  out.diagnostics.max_hermiticity_error = check.max_herm;
  return out;
}

}  // namespace

InterferenceResult run_interference(const ProtocolConfig& config) {
  return interference_impl(config, nullptr);
}

std::vector<TemperaturePoint> run_temperature_sweep(const ProtocolConfig& config, int workers) {
  config.validate();
  if (config.temperatures.empty()) throw std::invalid_argument("run_temperature_sweep: empty temperature list");
  return parallel_map<TemperaturePoint>(config.temperatures.size(), workers, [&](std::size_t i) {
    ProtocolConfig c = config;
    c.params.temperature = config.temperatures[i];
    HeraldRunResult h;
    const InterferenceResult r = interference_impl(c, &h);
    TemperaturePoint tp;
    tp.temperature = c.params.temperature;
    tp.n_th = c.params.n_th();
    tp.negativity = h.negativity;
    tp.concurrence = h.concurrence;
    tp.visibility = r.fit.visibility;
    tp.raw_visibility = r.fit.raw;
    tp.fit_ok = r.fit.fit_ok;
    tp.cutoffs = h.cutoffs;
    return tp;
  });
}

}  // namespace heraldsim
