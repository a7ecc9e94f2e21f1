#include <array>
#include <cmath>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "doctest.h"
#include "heraldsim/errors.hpp"
#include "heraldsim/fockspace.hpp"

using namespace heraldsim;

namespace {

DenseMatrix identity(int n) { return DenseMatrix::Identity(n, n); }

DensityMatrix random_state(const ModeLayout& l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  const int d = l.total_dim();
  DenseMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(n(rng), n(rng));
  DenseMatrix r = a * a.adjoint();
  r /= r.trace();
  return DensityMatrix(l, r);
}

}  // namespace

TEST_CASE("layout digits and index are inverse, first mode most significant") {
  const ModeLayout l = ModeLayout::canonical(3, 3, 4, 4);
  CHECK(l.total_dim() == 144);
  CHECK(l.stride(ModeLabel::APlus) == 48);
  CHECK(l.stride(ModeLabel::BMinus) == 1);
  for (int i = 0; i < l.total_dim(); ++i) {
    const auto d = l.digits(i);
    CHECK(l.index(d) == i);
    CHECK(d[2] == l.occupation(i, ModeLabel::BPlus));
  }
  const std::array<int, 4> d = {1, 2, 3, 0};
  CHECK(l.index(d) == 1 * 48 + 2 * 16 + 3 * 4);
}

TEST_CASE("layout rejects cutoffs below 2 and duplicate labels") {
  CHECK_THROWS_AS(ModeLayout::canonical(1, 3, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(ModeLayout({{ModeLabel::B1, 2}, {ModeLabel::B1, 3}}), std::invalid_argument);
}

TEST_CASE("ladder operators obey [a, a^dag] = 1 below the cutoff") {
  const int c = 6;
  const DenseMatrix a = destroy(c);
  const DenseMatrix comm = a * a.adjoint() - a.adjoint() * a;
  for (int n = 0; n < c - 1; ++n) CHECK(std::abs(comm(n, n) - 1.0) < 1e-14);
  CHECK(std::abs(comm(c - 1, c - 1) + double(c - 1)) < 1e-14);
  CHECK((number_op(c) - a.adjoint() * a).norm() < 1e-14);
}

TEST_CASE("embed equals an explicit Kronecker product") {
  const ModeLayout l = ModeLayout::canonical(2, 3, 2, 3);
  const DenseMatrix op = destroy(3);
  const DenseMatrix expect =
      Eigen::kroneckerProduct(identity(2),
                              Eigen::kroneckerProduct(op, identity(6)).eval()).eval();
  CHECK((embed(op, ModeLabel::AMinus, l).matrix - expect).norm() < 1e-14);
  CHECK((DenseMatrix(embed_sparse(op, ModeLabel::AMinus, l)) - expect).norm() < 1e-14);
}

TEST_CASE("displacement is unitary on the retained block and builds coherent states") {
  const Complex alpha(0.9, 0.4);
  const Displacement d = displacement(alpha, 16);
  CHECK(d.unitarity_deviation < 1e-8);
  CHECK(d.unitarity_deviation == doctest::Approx(1.0 - d.unitary.col(0).squaredNorm()));
  const DenseMatrix a = destroy(16);
  const StateVector psi = d.unitary.col(0);
  // Coherent state: eigenvector of a away from the truncation edge.
  const StateVector lhs = a * psi;
  for (int n = 0; n < 10; ++n) CHECK(std::abs(lhs(n) - alpha * psi(n)) < 1e-10);
  // D(-alpha) D(alpha) = 1 away from the truncation edge.
  const Displacement big = displacement(alpha, 40);
  const Displacement back = displacement(-alpha, 40);
  CHECK((back.unitary * big.unitary).topLeftCorner(6, 6).isIdentity(1e-9));
}

TEST_CASE("large displacement at a small cutoff reports the unitarity deviation") {
  CHECK(displacement(Complex(3.0, 0.0), 4).unitarity_deviation > 1e-3);
  CHECK(displacement(Complex(0.1, 0.0), 12).unitarity_deviation < 1e-10);
  // Poisson tail beyond n = 3 for |alpha|^2 = 9.
  double kept = 0.0, term = std::exp(-9.0);
  for (int n = 0; n < 4; ++n) {
    kept += term;
    term *= 9.0 / (n + 1);
  }
  CHECK(displacement(Complex(3.0, 0.0), 4, 60).unitarity_deviation ==
        doctest::Approx(1.0 - kept).epsilon(1e-9));
}

TEST_CASE("partial trace of a tensor product returns the factors") {
  const ModeLayout la({{ModeLabel::A1, 3}});
  const ModeLayout lb({{ModeLabel::B1, 2}, {ModeLabel::B2, 3}});
  const DensityMatrix ra = random_state(la, 1);
  const DensityMatrix rb = random_state(lb, 2);
  const DensityMatrix ab = tensor(ra, rb);
  CHECK(ab.dim() == 18);
  const std::array<ModeLabel, 2> keep_b = {ModeLabel::B1, ModeLabel::B2};
  const std::array<ModeLabel, 1> keep_a = {ModeLabel::A1};
  CHECK((partial_trace(ab, keep_b).matrix() - rb.matrix()).norm() < 1e-13);
  CHECK((partial_trace(ab, keep_a).matrix() - ra.matrix()).norm() < 1e-13);
  CHECK(std::abs(partial_trace(ab, keep_a).trace() - 1.0) < 1e-13);
}

TEST_CASE("partial transpose is an involution and preserves the trace") {
  const ModeLayout l({{ModeLabel::B1, 3}, {ModeLabel::B2, 3}});
  const DensityMatrix r = random_state(l, 3);
  const DenseMatrix pt = partial_transpose(r, ModeLabel::B2);
  CHECK(std::abs(pt.trace() - 1.0) < 1e-13);
  CHECK((partial_transpose(pt, l, ModeLabel::B2) - r.matrix()).norm() < 1e-14);
  // Full transpose = transpose on both modes.
  CHECK((partial_transpose(pt, l, ModeLabel::B1) - r.matrix().transpose()).norm() < 1e-14);
}

TEST_CASE("projection onto one photon renormalizes and reports the probability") {
  const ModeLayout l({{ModeLabel::A1, 3}, {ModeLabel::B1, 2}});
  StateVector psi = StateVector::Zero(6);
  psi(0) = std::sqrt(0.7);          // |0,0>
  psi(1 * 2 + 1) = std::sqrt(0.3);  // |1,1>
  const DensityMatrix r = DensityMatrix::from_pure(l, psi);
  const auto [proj, p] = project_and_normalize(r, number_projector(l, ModeLabel::A1, 1));
  CHECK(p == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(std::abs(proj.matrix()(3, 3) - 1.0) < 1e-14);
  const auto zero = number_projector(l, ModeLabel::A1, 2);
  CHECK_THROWS_AS(project_and_normalize(r, zero), ZeroProbabilityHerald);
}

TEST_CASE("density matrix validation flags non-positive input") {
  const ModeLayout l({{ModeLabel::B1, 2}});
  DenseMatrix m(2, 2);
  m << 1.1, 0.0, 0.0, -0.1;
  CHECK_THROWS_AS(DensityMatrix(l, m).validate(), InvalidState);
  const std::array<int, 1> one = {1};
  CHECK_NOTHROW(DensityMatrix::basis_state(l, one).validate());
  CHECK(DensityMatrix::basis_state(l, one).occupation(ModeLabel::B1) == doctest::Approx(1.0));
}
