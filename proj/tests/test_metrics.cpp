#include <array>
#include <cmath>
#include <random>

#include "doctest.h"

#include "heraldsim/errors.hpp"
#include "heraldsim/metrics.hpp"
#include "heraldsim/validation.hpp"

using namespace heraldsim;

namespace {

QubitMatrix projector(const Eigen::Vector4cd& v) {
  const Eigen::Vector4cd n = v.normalized();
  return n * n.adjoint();
}

// (|10> + e^{i phi}|01>)/sqrt2 in the order |00>,|01>,|10>,|11>.
QubitMatrix bell(double phi) {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(2) = 1.0;
  v(1) = std::polar(1.0, phi);
  return projector(v);
}

// <c^dag c> with c = (b1 + e^{i phi} b2)/sqrt2 on a (b1, b2) state.
double fringe(const DensityMatrix& rho, double phi) {
  const ModeLayout& l = rho.layout();
  const DenseMatrix b1 = embed(destroy(l.cutoff(ModeLabel::B1)), ModeLabel::B1, l).matrix;
  const DenseMatrix b2 = embed(destroy(l.cutoff(ModeLabel::B2)), ModeLabel::B2, l).matrix;
  const DenseMatrix c = (b1 + std::polar(1.0, phi) * b2) / std::sqrt(2.0);
  return (c.adjoint() * c * rho.matrix()).trace().real();
}

FringePattern pattern_of(const DensityMatrix& rho, double period, int n, double span) {
  FringePattern p;
  double mean = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = span * k / (n - 1);
    p.delays.push_back(t);
    p.intensity.push_back(fringe(rho, 2.0 * M_PI * t / period));
    mean += p.intensity.back() / n;
  }
  for (double& v : p.intensity) v /= mean;
  return p;
}

}  // namespace

TEST_CASE("Werner states follow the closed form") {
  for (double w : {0.0, 0.25, 0.4, 0.5, 0.75, 1.0}) {
    const QubitMatrix rho = w * bell(0.0) + (1.0 - w) * QubitMatrix::Identity() / 4.0;
    const double expect = std::max(0.0, (3.0 * w - 1.0) / 2.0);
    CHECK(std::abs(concurrence(rho) - expect) < 1e-10);
    CHECK(std::abs(negativity(rho) - expect) < 1e-10);
  }
}

TEST_CASE("validation suite metric checks pass") {
  for (auto f : {check_werner_states, check_bell_states, check_product_states,
                 check_coherent_state, check_partial_trace}) {
    const CheckResult r = f();
    INFO(r.name << " " << r.value << " " << r.detail);
    CHECK(r.passed);
  }
}

TEST_CASE("concurrence rejects matrices that are not states") {
  QubitMatrix bad = bell(0.0);
  bad(0, 0) = 0.5;
  CHECK_THROWS_AS(concurrence(bad), InvalidState);
  QubitMatrix neg = QubitMatrix::Zero();
  neg(0, 0) = 1.2;
  neg(3, 3) = -0.2;
  CHECK_THROWS_AS(concurrence(neg), InvalidState);
}

TEST_CASE("two-mode negativity agrees with the qubit form inside the qubit block") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ModeLayout l({{ModeLabel::B1, 3}, {ModeLabel::B2, 3}});
  for (int k = 0; k < 5; ++k) {
    const double w = u(rng);
    const QubitMatrix q = w * bell(u(rng) * 6.0) + (1.0 - w) * QubitMatrix::Identity() / 4.0;
    DenseMatrix m = DenseMatrix::Zero(9, 9);
    const int idx[4] = {0, 1, 3, 4};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(idx[i], idx[j]) = q(i, j);
    CHECK(negativity(DensityMatrix(l, m)) == doctest::Approx(negativity(q)).epsilon(1e-10));
  }
}

TEST_CASE("Bell fidelity maximum finds the phase") {
  for (double phi : {0.0, 0.7, 2.5, -1.2}) {
    const QubitMatrix rho = 0.9 * bell(phi) + 0.1 * QubitMatrix::Identity() / 4.0;
    CHECK(bell_fidelity(rho, phi) == doctest::Approx(0.925));
    const BellFidelity f = bell_fidelity_max(rho);
    CHECK(f.value == doctest::Approx(0.925).epsilon(1e-8));
    CHECK(std::abs(std::remainder(f.phi - phi, 2.0 * M_PI)) < 1e-4);
  }
  // Orthogonal phase gives the mixed-state floor.
  CHECK(bell_fidelity(bell(0.0), M_PI) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("heralding rate is the linewidth in MHz times the occupation") {
  // 338 MHz linewidth, n1 = 5e-4.
  CHECK(heralding_rate(2.0 * M_PI * 0.338, 5e-4) == doctest::Approx(0.169));
  CHECK(heralding_rate(2.0 * M_PI * 0.338, 0.0) == 0.0);
}

TEST_CASE("visibility fit recovers a synthetic cosine") {
  FringePattern p;
  const double period = 20.0;
  for (int k = 0; k < 16; ++k) {
    const double t = 30.0 * k / 15.0;
    p.delays.push_back(t);
    p.intensity.push_back(1.0 + 0.6 * std::cos(2.0 * M_PI * t / period + 0.3));
  }
  const VisibilityFit f = visibility(p, 2.0 * M_PI / 21.0);
  CHECK(f.fit_ok);
  CHECK_FALSE(f.undersampled);
  CHECK(f.visibility == doctest::Approx(0.6).epsilon(1e-8));
  CHECK(f.period == doctest::Approx(period).epsilon(1e-6));
  CHECK(f.raw <= 0.6 + 1e-12);
  CHECK(f.raw > 0.55);
}

TEST_CASE("delays coarser than half a period are flagged") {
  FringePattern p;
  for (int k = 0; k < 16; ++k) {
    const double t = 150.0 * k / 15.0;
    p.delays.push_back(t);
    p.intensity.push_back(1.0 + 0.5 * std::cos(2.0 * M_PI * t / 20.0));
  }
  const VisibilityFit f = visibility(p, 2.0 * M_PI / 20.0);
  CHECK(f.undersampled);
  CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("no seed frequency leaves only the raw contrast") {
  FringePattern p;
  for (int k = 0; k < 8; ++k) {
    p.delays.push_back(k);
    p.intensity.push_back(k % 2 ? 3.0 : 1.0);
  }
  const VisibilityFit f = visibility(p, 0.0);
  CHECK_FALSE(f.fit_ok);
  CHECK(f.visibility == doctest::Approx(0.5));
  CHECK(f.raw == doctest::Approx(0.5));
}

TEST_CASE("readout fringe contrast: Bell state 1, coherent product state 1/2") {
  const ModeLayout l({{ModeLabel::B1, 3}, {ModeLabel::B2, 3}});
  const int s = l.stride(ModeLabel::B1);

  StateVector psi = StateVector::Zero(9);
  psi(s) = psi(1) = 1.0 / std::sqrt(2.0);
  const FringePattern pb = pattern_of(DensityMatrix(l, psi * psi.adjoint()), 20.0, 16, 30.0);
  const VisibilityFit fb = visibility(pb, 2.0 * M_PI / 20.0);
  CHECK(fb.visibility == doctest::Approx(1.0).epsilon(1e-8));

  // ((|0> + |1>)/sqrt2) x ((|0> + |1>)/sqrt2).
  StateVector prod = StateVector::Zero(9);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) prod(a * s + b) = 0.5;
  const FringePattern pp = pattern_of(DensityMatrix(l, prod * prod.adjoint()), 20.0, 16, 30.0);
  const VisibilityFit fp = visibility(pp, 2.0 * M_PI / 20.0);
  CHECK(fp.visibility == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(fp.period == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("the dephased single-phonon mixture shows no fringe") {
  const ModeLayout l({{ModeLabel::B1, 2}, {ModeLabel::B2, 2}});
  DenseMatrix m = DenseMatrix::Zero(4, 4);
  m(1, 1) = m(2, 2) = 0.5;
  const FringePattern p = pattern_of(DensityMatrix(l, m), 20.0, 16, 30.0);
  for (double v : p.intensity) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  const VisibilityFit f = visibility(p, 2.0 * M_PI / 20.0);
  CHECK(f.raw < 1e-12);
}
