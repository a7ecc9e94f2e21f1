#include "heraldsim/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "heraldsim/errors.hpp"
#include "heraldsim/lindblad.hpp"
#include "heraldsim/meanfield.hpp"
#include "heraldsim/metrics.hpp"
#include "heraldsim/protocol.hpp"

namespace heraldsim {

namespace {

CheckResult make(std::string name, double value, double tol, std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.value = value;
  r.tolerance = tol;
  r.passed = std::isfinite(value) && value <= tol;
  r.detail = std::move(detail);
  return r;
}

SystemParams uncoupled() {
  SystemParams p = default_params();
  p.g = 0.0;
  return p;
}

QubitMatrix kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  QubitMatrix m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}

Eigen::Matrix2cd random_qubit(std::mt19937_64& rng, bool pure) {
  std::normal_distribution<double> n(0.0, 1.0);
  if (pure) {
    Eigen::Vector2cd v(Complex(n(rng), n(rng)), Complex(n(rng), n(rng)));
    v.normalize();
    return v * v.adjoint();
  }
  Eigen::Matrix2cd a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = Complex(n(rng), n(rng));
  Eigen::Matrix2cd r = a * a.adjoint();
  return r / r.trace();
}

}  // namespace

CheckResult check_single_mode_decay() {
  const SystemParams p = uncoupled();
  BathSpec baths = BathSpec::from_params(p);
  baths.n_th_mechanical = 0.0;
  baths.n_th_optical = 0.0;
  const double kappa = baths.kappa_plus;
  const double t = 3.0 / kappa;
  const ModeLayout layout = ModeLayout::canonical(6, 2, 2, 2);
  const ClassicalTrajectory cl = integrate_classical(p, {}, t + 1.0, 1.0 / 848.0);
  Propagator prop(cl, p, baths, layout);
  const std::array<int, 4> one = {1, 0, 0, 0};
  prop.reset(DensityMatrix::basis_state(layout, one), 0.0);
  prop.advance_to(t);
  const double n = prop.state().occupation(ModeLabel::APlus);
  const double expect = std::exp(-kappa * t);
  std::ostringstream os;
  os << "<n_a+>(3/kappa+) = " << n << ", exp(-3) = " << expect;
  return make("single-mode decay e^{-kappa t}", std::abs(n / expect - 1.0), 1e-6, os.str());
}

CheckResult check_thermal_fixed_point() {
  const SystemParams p = uncoupled();
  BathSpec baths = BathSpec::from_params(p);
  baths.gamma = 1.0;
  baths.n_th_mechanical = 0.5;
  const double t = 25.0;
  const ModeLayout layout = ModeLayout::canonical(2, 2, 16, 2);
  const ClassicalTrajectory cl = integrate_classical(p, {}, t, 1.0 / 848.0);
  Propagator prop(cl, p, baths, layout);
  const std::array<int, 4> vac = {0, 0, 0, 0};
  prop.reset(DensityMatrix::basis_state(layout, vac), 0.0);
  prop.advance_to(t);
  const double n = prop.state().occupation(ModeLabel::BPlus);
  std::ostringstream os;
  os << "<n_b+> after 25/gamma = " << n << ", n_th = 0.5";
  return make("thermal dissipator fixed point", std::abs(n / 0.5 - 1.0), 1e-4, os.str());
}

CheckResult check_werner_states() {
  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  psi(1) = psi(2) = 1.0 / std::sqrt(2.0);
  const QubitMatrix bell = psi * psi.adjoint();
  double worst = 0.0;
  for (double w : {0.0, 0.25, 0.4, 0.5, 0.75, 1.0}) {
    const QubitMatrix rho = w * bell + (1.0 - w) * QubitMatrix::Identity() / 4.0;
    const double expect = std::max(0.0, (3.0 * w - 1.0) / 2.0);
    worst = std::max(worst, std::abs(concurrence(rho) - expect));
    worst = std::max(worst, std::abs(negativity(rho) - expect));
  }
  return make("Werner-state concurrence and negativity", worst, 1e-10);
}

CheckResult check_bell_states() {
  const double s = 1.0 / std::sqrt(2.0);
  const std::array<std::array<Complex, 4>, 4> states = {{{s, 0, 0, s},
                                                         {s, 0, 0, -s},
                                                         {0, s, s, 0},
                                                         {0, s, -s, 0}}};
  double worst = 0.0;
  for (const auto& v : states) {
    Eigen::Vector4cd psi(v[0], v[1], v[2], v[3]);
    const QubitMatrix rho = psi * psi.adjoint();
    worst = std::max(worst, std::abs(concurrence(rho) - 1.0));
    worst = std::max(worst, std::abs(negativity(rho) - 1.0));
  }
  return make("Bell states C = N = 1", worst, 1e-10);
}

CheckResult check_product_states() {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const bool pure = k % 2 == 0;
    const QubitMatrix rho = kron2(random_qubit(rng, pure), random_qubit(rng, pure));
    worst = std::max({worst, concurrence(rho), negativity(rho)});
  }
  return make("random product states C = N = 0", worst, 1e-9);
}

CheckResult check_coherent_state() {
  const Complex alpha(0.7, -0.3);
  const int cutoff = 12;
  const Displacement d = displacement(alpha, cutoff);
  const StateVector got = d.unitary.col(0);
  double worst = 0.0;
  double fact = 1.0;
  for (int n = 0; n < cutoff; ++n) {
    if (n > 0) fact *= n;
    const Complex expect = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) / std::sqrt(fact);
    worst = std::max(worst, std::abs(got(n) - expect));
  }
  return make("displacement of vacuum equals coherent state", worst, 1e-10);
}

CheckResult check_partial_trace() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  auto random_rho = [&](ModeLabel label, int c) {
    DenseMatrix a(c, c);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j) a(i, j) = Complex(n(rng), n(rng));
    DenseMatrix r = a * a.adjoint();
    r /= r.trace();
    return DensityMatrix(ModeLayout({{label, c}}), r);
  };
  const DensityMatrix ra = random_rho(ModeLabel::APlus, 3);
  const DensityMatrix rb = random_rho(ModeLabel::BPlus, 4);
  const DensityMatrix ab = tensor(ra, rb);
  const std::array<ModeLabel, 1> keep_a = {ModeLabel::APlus};
  const std::array<ModeLabel, 1> keep_b = {ModeLabel::BPlus};
  const double ea = (partial_trace(ab, keep_a).matrix() - ra.matrix()).cwiseAbs().maxCoeff();
  const double eb = (partial_trace(ab, keep_b).matrix() - rb.matrix()).cwiseAbs().maxCoeff();
  return make("partial trace of a product state", std::max(ea, eb), 1e-12);
}

CheckResult check_classical_dopri() {
  namespace ode = boost::numeric::odeint;
  const ProtocolConfig cfg = default_config();
  const SystemParams& p = cfg.params;
  const double t_end = cfg.write.t0 + 8.0 * cfg.write.sigma;
  const double dt = cfg.dt;
  const ClassicalTrajectory rk = integrate_classical(p, {cfg.write}, t_end, dt);

  typedef std::array<double, 8> State;
  auto pack = [](const ClassicalAmplitudes& c) {
    return State{c.alpha_plus.real(), c.alpha_plus.imag(), c.alpha_minus.real(),
                 c.alpha_minus.imag(), c.beta_plus.real(), c.beta_plus.imag(),
                 c.beta_minus.real(), c.beta_minus.imag()};
  };
  auto rhs = [&](const State& y, State& dy, double t) {
    const ClassicalAmplitudes c{{y[0], y[1]}, {y[2], y[3]}, {y[4], y[5]}, {y[6], y[7]}};
    dy = pack(classical_rhs(p, c, pulse_value(cfg.write, t)));
  };
  State y{};
  double peak_a = 0.0, peak_b = 0.0;
  auto stepper = ode::make_dense_output(1e-12, 1e-10, ode::runge_kutta_dopri5<State>());
  ode::integrate_const(stepper, rhs, y, 0.0, t_end, dt, [&](const State& s, double) {
    peak_a = std::max(peak_a, s[0] * s[0] + s[1] * s[1]);
    peak_b = std::max(peak_b, s[4] * s[4] + s[5] * s[5]);
  });
  double rk_a = 0.0, rk_b = 0.0;
  for (std::size_t i = 0; i < rk.size(); ++i) {
    rk_a = std::max(rk_a, std::norm(rk.alpha_plus[i]));
    rk_b = std::max(rk_b, std::norm(rk.beta_plus[i]));
  }
  const double err = std::max(std::abs(rk_a / peak_a - 1.0), std::abs(rk_b / peak_b - 1.0));
  std::ostringstream os;
  os << "peak |alpha+|^2 " << rk_a << " vs " << peak_a << ", peak |beta+|^2 " << rk_b << " vs "
     << peak_b;
  return make("classical peaks vs dopri5", err, 1e-3, os.str());
}

std::vector<CheckResult> run_validation() {
  std::vector<CheckResult> out;
  auto guard = [&](const char* name, CheckResult (*f)()) {
    try {
      out.push_back(f());
    } catch (const std::exception& e) {
      CheckResult r;
      r.name = name;
      r.passed = false;
      r.value = std::numeric_limits<double>::quiet_NaN();
      r.detail = std::string("threw: ") + e.what();
      out.push_back(r);
    }
  };
  guard("single-mode decay", check_single_mode_decay);
  guard("thermal fixed point", check_thermal_fixed_point);
  guard("Werner states", check_werner_states);
  guard("Bell states", check_bell_states);
  guard("product states", check_product_states);
  guard("coherent state", check_coherent_state);
  guard("partial trace", check_partial_trace);
  guard("classical dopri5", check_classical_dopri);
  return out;
}

}  // namespace heraldsim
