#include "heraldsim/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "heraldsim/errors.hpp"

namespace heraldsim {

BathSpec BathSpec::from_params(const SystemParams& params) {
  BathSpec b;
  b.kappa_plus = params.kappa_plus;
  b.kappa_minus = params.kappa_minus;
  b.gamma = params.gamma;
  b.n_th_optical = 0.0;
  b.n_th_mechanical = params.n_th();
  return b;
}

void BathSpec::validate() const {
  if (!(kappa_plus >= 0.0) || !(kappa_minus >= 0.0) || !(gamma >= 0.0))
    throw std::invalid_argument("BathSpec: rates must be >= 0");
  if (!(n_th_optical >= 0.0) || !(n_th_mechanical >= 0.0))
    throw std::invalid_argument("BathSpec: occupations must be >= 0");
}

std::array<double, 4> normal_occupations(const DensityMatrix& rho) {
  return {rho.occupation(ModeLabel::APlus), rho.occupation(ModeLabel::AMinus),
          rho.occupation(ModeLabel::BPlus), rho.occupation(ModeLabel::BMinus)};
}

namespace {

// <c_p^dag c_m> for two modes of the layout.
Complex cross_moment(const DensityMatrix& rho, ModeLabel p, ModeLabel m) {
  const ModeLayout& l = rho.layout();
  const int sp = l.stride(p), sm = l.stride(m);
  const int cp = l.cutoff(p), cm = l.cutoff(m);
  const DenseMatrix& r = rho.matrix();
  Complex acc{0.0, 0.0};
  // <c_p^dag c_m> = sum_{i} <i| c_p^dag c_m rho |i> = sum_j (c_p^dag c_m)_{ij} rho_{ji}
  for (int j = 0; j < l.total_dim(); ++j) {
    const int nm = (j / sm) % cm;
    if (nm == 0) continue;
    const int k = j - sm;
    const int np = (k / sp) % cp;
    if (np + 1 >= cp) continue;
    const int i = k + sp;
    acc += std::sqrt(static_cast<double>(nm) * (np + 1)) * r(j, i);
  }
  return acc;
}

}  // namespace

std::array<double, 4> local_occupations(const DensityMatrix& rho) {
  const auto n = normal_occupations(rho);
  const double xa = cross_moment(rho, ModeLabel::APlus, ModeLabel::AMinus).real();
  const double xb = cross_moment(rho, ModeLabel::BPlus, ModeLabel::BMinus).real();
  return {0.5 * (n[0] + n[1]) + xa, 0.5 * (n[0] + n[1]) - xa, 0.5 * (n[2] + n[3]) + xb,
          0.5 * (n[2] + n[3]) - xb};
}

namespace {

// Jump operator sqrt(rate) * L with L a single band: L(i, i - offset) = weight(i).
struct Jump {
  double rate;
  int offset;
  Eigen::VectorXd weight;
};

Jump make_jump(double rate, bool lowering, const ModeLayout& layout, ModeLabel m) {
  const DenseMatrix d = destroy(layout.cutoff(m));
  const DenseMatrix single = lowering ? d : DenseMatrix(d.adjoint());
  const SparseMatrix op = embed_sparse(single, m, layout);
  Jump j{rate, lowering ? -layout.stride(m) : layout.stride(m), Eigen::VectorXd::Zero(layout.total_dim())};
  for (int r = 0; r < op.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(op, r); it; ++it) j.weight[it.row()] = it.value().real();
  return j;
}

// Adjoint partner: L^dag X L as a band sandwich of L^dag's transpose structure.
Jump adjoint_jump(const Jump& j) {
  const int dim = static_cast<int>(j.weight.size());
  Jump a{j.rate, -j.offset, Eigen::VectorXd::Zero(dim)};
  for (int i = 0; i < dim; ++i) {
    const int src = i + j.offset;
    if (src >= 0 && src < dim) a.weight[i] = j.weight[src];
  }
  return a;
}

// out(i, j) += rate * w_i w_j x(i - d, j - d).
void apply_jump(const Jump& jp, const DenseMatrix& x, DenseMatrix& out) {
  const int dim = static_cast<int>(x.rows());
  const int d = jp.offset;
  const int lo = std::max(0, d);
  const int len = dim - std::abs(d);
  if (len <= 0) return;
  const auto w = jp.weight.segment(lo, len);
  for (int j = lo; j < lo + len; ++j) {
    const double cj = jp.rate * jp.weight[j];
    if (cj == 0.0) continue;
    out.col(j).segment(lo, len) += cj * w.cwiseProduct(x.col(j - d).segment(lo - d, len));
  }
}

}  // namespace

struct Propagator::Impl {
  const ClassicalTrajectory* classical;
  SystemParams params;
  BathSpec baths;
  ModeLayout layout;
  EvolveOptions options;
  FluctuationTerms terms;
  std::vector<Jump> jumps, adjoint_jumps;
  Eigen::VectorXd decay_diag;  // sum_j L_j^dag L_j (diagonal in the Fock basis)
  std::vector<Eigen::VectorXcd> bands;
  int diag_band = -1;
  double dt;       // classical grid spacing
  double h_step;   // drive-window quantum step
  std::vector<float> strength;  // classical coupling scale per grid point
  DenseMatrix rho;  // interaction frame when options.interaction_picture
  double t_base = 0.0;
  long pos = 0;          // classical grid steps taken since t_base
  long rk_steps = 0;
  double partial = 0.0;  // extra time beyond the grid when off-grid
  double trace0 = 1.0;
  double max_drift = 0.0;
  DenseMatrix k, tmp, acc, stage;

  Impl(const ClassicalTrajectory& c, const SystemParams& p, const BathSpec& b,
       const ModeLayout& l, EvolveOptions o)
      : classical(&c), params(p), baths(b), layout(l), options(o), terms(l, p) {
    if (options.stride < 1) throw std::invalid_argument("EvolveOptions: stride must be >= 1");
    if (options.free_stride < options.stride)
      throw std::invalid_argument("EvolveOptions: free_stride must be >= stride");
    baths.validate();
    dt = c.dt;
    h_step = options.stride * c.dt;
    strength.resize(c.size());
    const double ga = p.g / std::sqrt(2.0), gb = p.g * std::sqrt(2.0);
    for (std::size_t i = 0; i < c.size(); ++i)
      strength[i] = static_cast<float>(
          ga * std::max(std::abs(c.alpha_plus[i]), std::abs(c.alpha_minus[i])) +
          gb * std::max(std::abs(c.beta_plus[i]), std::abs(c.beta_minus[i])));
    auto add = [&](double rate, bool lowering, ModeLabel m) {
      if (rate > 0.0) jumps.push_back(make_jump(rate, lowering, layout, m));
    };
    add(baths.kappa_plus * (baths.n_th_optical + 1.0), true, ModeLabel::APlus);
    add(baths.kappa_minus * (baths.n_th_optical + 1.0), true, ModeLabel::AMinus);
    add(baths.kappa_plus * baths.n_th_optical, false, ModeLabel::APlus);
    add(baths.kappa_minus * baths.n_th_optical, false, ModeLabel::AMinus);
    for (ModeLabel m : {ModeLabel::BPlus, ModeLabel::BMinus}) {
      add(baths.gamma * (baths.n_th_mechanical + 1.0), true, m);
      add(baths.gamma * baths.n_th_mechanical, false, m);
    }
    const int dim = layout.total_dim();
    // L^dag L for a band operator is diagonal: (L^dag L)(j, j) = w_{j + d}^2.
    decay_diag = Eigen::VectorXd::Zero(dim);
    for (const Jump& jp : jumps) {
      adjoint_jumps.push_back(adjoint_jump(jp));
      for (int i = 0; i < dim; ++i) {
        const int r = i + jp.offset;
        if (r >= 0 && r < dim) decay_diag[i] += jp.rate * jp.weight[r] * jp.weight[r];
      }
    }
    const auto& offs = terms.band_offsets();
    for (std::size_t b = 0; b < offs.size(); ++b)
      if (offs[b] == 0) diag_band = static_cast<int>(b);
    if (diag_band < 0) throw std::logic_error("Propagator: missing diagonal band");
    k.resize(dim, dim);
    tmp.resize(dim, dim);
    acc.resize(dim, dim);
  }

  double now() const { return t_base + static_cast<double>(pos) * dt + partial; }
  double grid_time(long p) const { return t_base + static_cast<double>(p) * dt; }

  // Number of classical grid steps for the next step over [t, t + s dt]
  // (direction +1) or [t - s dt, t] (direction -1), capped at `available`.
  long choose(double t, long available, int direction) const {
    long s = options.stride;
    const long f = options.free_stride;
    if (f > s && available >= f) {
      const double a = direction > 0 ? t : t - f * dt;
      const double b = direction > 0 ? t + f * dt : t;
      long i0 = static_cast<long>(std::floor((a - classical->t_start) / dt - 1e-9));
      long i1 = static_cast<long>(std::ceil((b - classical->t_start) / dt + 1e-9));
      i0 = std::max<long>(i0, 0);
      i1 = std::min<long>(i1, static_cast<long>(strength.size()) - 1);
      float mx = 0.0f;
      for (long i = i0; i <= i1; ++i) mx = std::max(mx, strength[i]);
      if (mx < options.quiet_threshold) s = f;
    }
    return std::min(s, available);
  }

  ClassicalAmplitudes amplitudes(double t) const {
    const long idx = classical->grid_index(t);
    if (idx >= 0) return classical->at(static_cast<std::size_t>(idx));
    return classical->interpolate(t);
  }

  void build_h(double t) {
    const ClassicalAmplitudes c = amplitudes(t);
    FluctuationTerms::Coefficients co;
    if (options.interaction_picture) {
      co = terms.interaction_coefficients(params, c);
      for (int j = 0; j < FluctuationTerms::kCount; ++j) {
        const double w = terms.frequency(j);
        if (w != 0.0 && co[j] != 0.0) co[j] *= std::polar(1.0, w * t);
      }
    } else {
      co = terms.coefficients(params, c);
    }
    terms.assemble(co, bands);
  }

  // out = generator applied to x at time t (adjoint: the Heisenberg generator).
  void rhs(const DenseMatrix& x, double t, bool adjoint, DenseMatrix& out) {
    build_h(t);
    const Complex i1{0.0, 1.0};
    // Forward: K = -i (H - i Gamma/2) x. Adjoint: K = i (H + i Gamma/2) x.
    if (!adjoint) bands[diag_band] -= 0.5 * i1 * decay_diag.cast<Complex>();
    else bands[diag_band] += 0.5 * i1 * decay_diag.cast<Complex>();
    tmp.setZero();
    apply_bands(terms.band_offsets(), bands, x, tmp);
    tmp *= adjoint ? i1 : -i1;
    out = tmp + tmp.adjoint();
    for (const Jump& jp : adjoint ? adjoint_jumps : jumps) apply_jump(jp, x, out);
    // Exact Hermitian part of the result.
    tmp = out.adjoint();
    out += tmp;
    out *= 0.5;
  }

  // Forward: dy/dt = L_t(y). Adjoint (hh < 0): dy/ds = -L_s^dag(y), stepping backward.
  void rk4(DenseMatrix& y, double t, double hh, bool adjoint) {
    const double dir = adjoint ? -1.0 : 1.0;
    stage.resize(y.rows(), y.cols());
    rhs(y, t, adjoint, k);
    acc = k;
    stage = y + (dir * 0.5 * hh) * k;
    rhs(stage, t + 0.5 * hh, adjoint, k);
    acc += 2.0 * k;
    stage = y + (dir * 0.5 * hh) * k;
    rhs(stage, t + 0.5 * hh, adjoint, k);
    acc += 2.0 * k;
    stage = y + (dir * hh) * k;
    rhs(stage, t + hh, adjoint, k);
    acc += k;
    y += (dir * hh / 6.0) * acc;
  }

  // Element-wise exp(sign * i (E_m - E_n) t) for the interaction/lab frame change.
  void rotate(DenseMatrix& x, double t, double sign) const {
    if (!options.interaction_picture || t == 0.0) return;
    const auto& e = terms.h0_diagonal();
    const int dim = static_cast<int>(x.rows());
    std::vector<Complex> ph(dim);
    for (int m = 0; m < dim; ++m) ph[m] = std::polar(1.0, sign * e[m] * t);
    for (int n = 0; n < dim; ++n)
      for (int m = 0; m < dim; ++m) x(m, n) *= ph[m] * std::conj(ph[n]);
  }

  void check_trace() {
    const double drift = std::abs(rho.trace() - trace0);
    max_drift = std::max(max_drift, drift);
    if (!(drift <= options.trace_failure)) {
      std::ostringstream os;
      os << "trace drift " << drift << " exceeds " << options.trace_failure << " at t = "
         << std::setprecision(10) << now() << " ns";
      throw AccuracyFailure(os.str());
    }
  }
};

Propagator::Propagator(const ClassicalTrajectory& classical, const SystemParams& params,
                       const BathSpec& baths, const ModeLayout& layout, EvolveOptions options)
    : impl_(std::make_unique<Impl>(classical, params, baths, layout, options)) {}

Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

double Propagator::step() const { return impl_->h_step; }
double Propagator::time() const { return impl_->now(); }
double Propagator::max_trace_drift() const { return impl_->max_drift; }
long Propagator::steps_taken() const { return impl_->rk_steps; }

void Propagator::reset(const DensityMatrix& rho, double t) {
  if (!(rho.layout() == impl_->layout))
    throw std::invalid_argument("Propagator::reset: layout mismatch");
  const ClassicalTrajectory& c = *impl_->classical;
  if (t < c.t_start - 1e-9 * c.dt || t > c.t_end() + 1e-9 * c.dt)
    throw std::invalid_argument("Propagator::reset: time outside classical span");
  impl_->rho = rho.matrix();
  impl_->rotate(impl_->rho, t, +1.0);
  impl_->t_base = t;
  impl_->pos = 0;
  impl_->partial = 0.0;
  impl_->trace0 = rho.trace().real();
  impl_->max_drift = 0.0;
}

void Propagator::advance_to(double t) {
  Impl& m = *impl_;
  const double eps = 1e-9 * m.dt;
  if (t < m.now() - eps) throw std::invalid_argument("Propagator::advance_to: time in the past");
  if (t > m.classical->t_end() + eps)
    throw std::invalid_argument("Propagator::advance_to: time beyond classical trajectory");
  if (m.partial != 0.0) {
    // Return to the grid before continuing with full steps.
    const double grid_next = m.grid_time(m.pos + 1);
    const double target = std::min(t, grid_next);
    const double hh = target - m.now();
    if (hh > eps) {
      m.rk4(m.rho, m.now(), hh, false);
      ++m.rk_steps;
      m.partial += hh;
    }
    if (std::abs(m.now() - grid_next) <= eps) {
      ++m.pos;
      m.partial = 0.0;
    }
    m.check_trace();
  }
  if (m.partial == 0.0) {
    const long target = static_cast<long>(std::floor((t - m.t_base) / m.dt + 1e-9));
    while (m.pos < target) {
      const long s = m.choose(m.now(), target - m.pos, +1);
      m.rk4(m.rho, m.now(), static_cast<double>(s) * m.dt, false);
      ++m.rk_steps;
      m.pos += s;
      m.check_trace();
    }
  }
  const double rest = t - m.now();
  if (rest > eps) {
    m.rk4(m.rho, m.now(), rest, false);
    ++m.rk_steps;
    m.partial += rest;
    m.check_trace();
  }
}

DensityMatrix Propagator::state() const {
  DenseMatrix out = impl_->rho;
  impl_->rotate(out, impl_->now(), -1.0);
  return DensityMatrix(impl_->layout, std::move(out));
}

DenseMatrix Propagator::evolve_observable_backward(const DenseMatrix& observable, double t_final,
                                                   double t_initial) {
  Impl& m = *impl_;
  const int dim = m.layout.total_dim();
  if (observable.rows() != dim || observable.cols() != dim)
    throw std::invalid_argument("evolve_observable_backward: shape mismatch");
  if (!(t_final >= t_initial)) throw std::invalid_argument("evolve_observable_backward: t_final < t_initial");
  const ClassicalTrajectory& c = *m.classical;
  if (t_initial < c.t_start - 1e-9 * c.dt || t_final > c.t_end() + 1e-9 * c.dt)
    throw std::invalid_argument("evolve_observable_backward: interval outside classical span");
  DenseMatrix x = observable;
  m.rotate(x, t_final, +1.0);
  const double eps = 1e-9 * m.dt;
  // Grid aligned to t_initial so that stage times land on the classical grid.
  const long n = static_cast<long>(std::floor((t_final - t_initial) / m.dt + 1e-9));
  const double head = (t_final - t_initial) - static_cast<double>(n) * m.dt;
  if (head > eps) {
    m.rk4(x, t_final, -head, true);
    ++m.rk_steps;
  }
  long p = n;
  while (p > 0) {
    const double tt = t_initial + static_cast<double>(p) * m.dt;
    const long s = m.choose(tt, p, -1);
    m.rk4(x, tt, -static_cast<double>(s) * m.dt, true);
    ++m.rk_steps;
    p -= s;
  }
  m.rotate(x, t_initial, -1.0);
  return x;
}

QuantumTrajectory evolve(const DensityMatrix& rho0, const ClassicalTrajectory& classical,
                         const SystemParams& params, const BathSpec& baths,
                         const std::vector<double>& sample_times, EvolveOptions options,
                         double t_initial) {
  rho0.validate();
  const double t0 = t_initial < 0.0 ? classical.t_start : t_initial;
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < t0 - 1e-12 || sample_times[i] > classical.t_end() + 1e-9 * classical.dt)
      throw std::invalid_argument("evolve: sample time outside the classical trajectory span");
    if (i > 0 && sample_times[i] < sample_times[i - 1])
      throw std::invalid_argument("evolve: sample times must be non-decreasing");
  }
  Propagator prop(classical, params, baths, rho0.layout(), options);
  prop.reset(rho0, t0);
  QuantumTrajectory out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (double ts : sample_times) {
    prop.advance_to(ts);
    DensityMatrix s = prop.state();
    const double herm = s.hermiticity_error();
    out.max_hermiticity_error = std::max(out.max_hermiticity_error, herm);
    if (options.check_positivity) {
      const double ev = s.min_eigenvalue();
      out.min_eigenvalue = std::min(out.min_eigenvalue, ev);
      if (ev < -options.positivity_failure) {
        std::ostringstream os;
        os << "density matrix eigenvalue " << ev << " below -" << options.positivity_failure
           << " at t = " << ts << " ns";
        throw PositivityFailure(os.str());
      }
    }
    out.times.push_back(ts);
    out.normal_occupations.push_back(normal_occupations(s));
    out.local_occupations.push_back(local_occupations(s));
    if (options.keep_snapshots) out.snapshots.push_back(std::move(s));
  }
  out.max_trace_drift = prop.max_trace_drift();
  return out;
}

int thermal_cutoff(double n_th, double tol) {
  if (!(n_th >= 0.0)) throw std::invalid_argument("thermal_cutoff: n_th must be >= 0");
  if (n_th == 0.0) return 2;
  const double r = n_th / (n_th + 1.0);
  int c = 2;
  while (std::pow(r, c) >= tol) ++c;
  return c;
}

DensityMatrix thermal_state(double n_th, int cutoff, ModeLabel label, double tail_tolerance) {
  if (!(n_th >= 0.0)) throw std::invalid_argument("thermal_state: n_th must be >= 0");
  if (cutoff < 2) throw std::invalid_argument("thermal_state: cutoff must be >= 2");
  ModeLayout layout({{label, cutoff}});
  DenseMatrix m = DenseMatrix::Zero(cutoff, cutoff);
  if (n_th == 0.0) {
    m(0, 0) = 1.0;
    return DensityMatrix(layout, std::move(m));
  }
  const double r = n_th / (n_th + 1.0);
  const double tail = std::pow(r, cutoff);
  if (tail >= tail_tolerance) {
    std::ostringstream os;
    os << "thermal_state: truncated tail weight " << tail << " at cutoff " << cutoff
       << " for n_th = " << n_th << " exceeds " << tail_tolerance << " (need cutoff "
       << thermal_cutoff(n_th, tail_tolerance) << ")";
    throw CutoffTooSmall(os.str());
  }
  double norm = 0.0;
  for (int n = 0; n < cutoff; ++n) norm += std::pow(r, n);
  for (int n = 0; n < cutoff; ++n) m(n, n) = std::pow(r, n) / norm;
  return DensityMatrix(layout, std::move(m));
}

void write_occupation_csv(std::ostream& os, const QuantumTrajectory& traj) {
  os << "# fluctuation occupations <d^dag d>, time in ns\n";
  os << "t_ns,n_a_plus,n_a_minus,n_b_plus,n_b_minus,n_a1,n_a2,n_b1,n_b2\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i];
    for (double v : traj.normal_occupations[i]) os << ',' << v;
    for (double v : traj.local_occupations[i]) os << ',' << v;
    os << '\n';
  }
}

}  // namespace heraldsim
