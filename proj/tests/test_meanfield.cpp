#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "doctest.h"
#include "heraldsim/meanfield.hpp"
#include "heraldsim/protocol.hpp"

using namespace heraldsim;

namespace {

typedef std::array<double, 8> State;

// Mean-field equations written out independently of classical_rhs.
struct Equations {
  SystemParams p;
  PulseSpec pulse;
  void operator()(const State& y, State& dy, double t) const {
    const Complex i1(0.0, 1.0);
    const Complex ap(y[0], y[1]), am(y[2], y[3]), bp(y[4], y[5]), bm(y[6], y[7]);
    const double r2 = std::sqrt(2.0);
    const Complex f = pulse_value(pulse, t) / r2;
    const Complex dap = -i1 * ((p.J_c + p.g * r2 * bp.real() - 0.5 * i1 * p.kappa_plus) * ap +
                               p.g * r2 * bm.real() * am + f);
    const Complex dam = -i1 * ((-p.J_c + p.g * r2 * bp.real() - 0.5 * i1 * p.kappa_minus) * am +
                               p.g * r2 * bm.real() * ap + f);
    const double s = p.g / r2;
    const Complex dbp = -i1 * ((p.Omega_plus() - 0.5 * i1 * p.gamma) * bp + p.Omega_minus() * bm +
                               s * (std::norm(ap) + std::norm(am)));
    const Complex dbm = -i1 * ((p.Omega_plus() - 0.5 * i1 * p.gamma) * bm + p.Omega_minus() * bp +
                               s * 2.0 * (std::conj(ap) * am).real());
    dy = {dap.real(), dap.imag(), dam.real(), dam.imag(),
          dbp.real(), dbp.imag(), dbm.real(), dbm.imag()};
  }
};

}  // namespace

TEST_CASE("classical trajectory agrees with an adaptive dopri5 integration") {
  namespace ode = boost::numeric::odeint;
  const ProtocolConfig cfg = default_config();
  const double t_end = 50.0;
  const ClassicalTrajectory tr = integrate_classical(cfg.params, {cfg.write}, t_end, cfg.dt);
  Equations eq{cfg.params, cfg.write};
  State y{};
  auto stepper = ode::make_dense_output(1e-12, 1e-11, ode::runge_kutta_dopri5<State>());
  const std::size_t every = 848;  // 1 ns
  std::vector<double> times;
  for (std::size_t i = 0; i < tr.size(); i += every) times.push_back(tr.time(i));
  std::vector<State> ref;
  ode::integrate_times(stepper, eq, y, times.begin(), times.end(), 1e-3,
                       [&](const State& s, double) { ref.push_back(s); });
  REQUIRE(ref.size() == times.size());
  double peak_a = 0.0, peak_b = 0.0, err_a = 0.0, err_b = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const ClassicalAmplitudes c = tr.at(k * every);
    const Complex ap(ref[k][0], ref[k][1]), bp(ref[k][4], ref[k][5]), bm(ref[k][6], ref[k][7]);
    peak_a = std::max(peak_a, std::abs(ap));
    peak_b = std::max(peak_b, std::abs(bp));
    err_a = std::max(err_a, std::abs(c.alpha_plus - ap));
    err_b = std::max({err_b, std::abs(c.beta_plus - bp), std::abs(c.beta_minus - bm)});
  }
  CHECK(err_a < 1e-3 * peak_a);
  CHECK(err_b < 1e-3 * peak_b);
  CHECK(peak_b > 0.0);
}

TEST_CASE("classical_rhs matches the written-out equations") {
  const ProtocolConfig cfg = default_config();
  Equations eq{cfg.params, cfg.write};
  const ClassicalAmplitudes c{{3.0, -1.0}, {0.5, 0.2}, {0.01, 0.02}, {-0.03, 0.0}};
  const double t = 28.0;
  State y = {3.0, -1.0, 0.5, 0.2, 0.01, 0.02, -0.03, 0.0}, dy{};
  eq(y, dy, t);
  const ClassicalAmplitudes d = classical_rhs(cfg.params, c, pulse_value(cfg.write, t));
  CHECK(std::abs(d.alpha_plus - Complex(dy[0], dy[1])) < 1e-9 * std::abs(d.alpha_plus));
  CHECK(std::abs(d.alpha_minus - Complex(dy[2], dy[3])) < 1e-9 * std::abs(d.alpha_minus));
  CHECK(std::abs(d.beta_plus - Complex(dy[4], dy[5])) < 1e-9 * std::abs(d.beta_plus));
  CHECK(std::abs(d.beta_minus - Complex(dy[6], dy[7])) < 1e-9 * std::abs(d.beta_minus));
}

TEST_CASE("undriven optical field decays at kappa/2 in amplitude") {
  SystemParams p = default_params();
  p.g = 0.0;
  const ClassicalAmplitudes init{{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  const ClassicalTrajectory tr = integrate_classical(p, {}, 2.0, 1.0 / 848.0, init);
  const std::size_t last = tr.size() - 1;
  const double t = tr.time(last);
  CHECK(std::abs(tr.alpha_plus[last]) == doctest::Approx(std::exp(-0.5 * p.kappa_plus * t)).epsilon(1e-4));
  CHECK(std::arg(tr.alpha_plus[last]) == doctest::Approx(std::remainder(-p.J_c * t, 2.0 * M_PI)).epsilon(1e-4));
}

TEST_CASE("step above the stability bound is rejected") {
  const SystemParams p = default_params();
  CHECK_THROWS_AS(integrate_classical(p, {}, 1.0, 2.0 * max_time_step(p)), std::invalid_argument);
}

TEST_CASE("grid lookup and interpolation") {
  const ProtocolConfig cfg = default_config();
  const ClassicalTrajectory tr = integrate_classical(cfg.params, {cfg.write}, 10.0, cfg.dt);
  CHECK(tr.grid_index(1.0) == 848);
  CHECK(tr.grid_index(1.0 + 0.5 * cfg.dt) == -1);
  const ClassicalAmplitudes mid = tr.interpolate(tr.time(100) + 0.5 * cfg.dt);
  CHECK(std::abs(mid.alpha_plus - 0.5 * (tr.alpha_plus[100] + tr.alpha_plus[101])) < 1e-12);
}
