#include "heraldsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "heraldsim/errors.hpp"

namespace heraldsim {

namespace {

void check_qubit_state(const QubitMatrix& rho, const char* who) {
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  const double tr = std::abs(rho.trace() - 1.0);
  Eigen::SelfAdjointEigenSolver<QubitMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  const double ev = es.eigenvalues().minCoeff();
  if (herm > 1e-8 || tr > 1e-8 || ev < -1e-8) {
    std::ostringstream os;
    os << who << ": not a density matrix (hermiticity " << herm << ", trace error " << tr
       << ", min eigenvalue " << ev << ")";
    throw InvalidState(os.str());
  }
}

// Projection of data onto span{1, cos wt, sin wt}; returns the squared residual.
struct LinearFit {
  double c0 = 0.0, a = 0.0, b = 0.0, residual = 0.0;
  bool ok = false;
};

LinearFit fit_at(const std::vector<double>& t, const std::vector<double>& y, double w) {
  Eigen::MatrixXd x(t.size(), 3);
  Eigen::VectorXd v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = std::cos(w * t[i]);
    x(i, 2) = std::sin(w * t[i]);
    v[i] = y[i];
  }
  LinearFit f;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 3) return f;
  const Eigen::Vector3d c = qr.solve(v);
  f.c0 = c[0];
  f.a = c[1];
  f.b = c[2];
  f.residual = (x * c - v).squaredNorm();
  f.ok = true;
  return f;
}

}  // namespace

double concurrence(const QubitMatrix& rho) {
  check_qubit_state(rho, "concurrence");
  const QubitMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<QubitMatrix> es(h);
  // rho = A A^dag; the Wootters lambdas are the singular values of A^T (yy) A.
  const QubitMatrix a = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  // sigma_y x sigma_y flips |00> <-> |11> and |01> <-> |10> with signs (-1, 1, 1, -1).
  QubitMatrix yy = QubitMatrix::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const QubitMatrix tau = a.transpose() * yy * a;
  Eigen::JacobiSVD<QubitMatrix> svd(tau);
  const Eigen::Vector4d l = svd.singularValues();  // descending
  return std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
}

double negativity(const DensityMatrix& rho_mech) {
  const ModeLayout& l = rho_mech.layout();
  if (l.num_modes() != 2) throw std::invalid_argument("negativity: two-mode state required");
  if (rho_mech.hermiticity_error() > 1e-8 || std::abs(rho_mech.trace() - 1.0) > 1e-8)
    throw InvalidState("negativity: input is not a normalized Hermitian matrix");
  const DenseMatrix pt = partial_transpose(rho_mech, l.modes()[1].label);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (pt + pt.adjoint()), Eigen::EigenvaluesOnly);
  const double norm1 = es.eigenvalues().cwiseAbs().sum();
  return std::max(0.0, norm1 - 1.0);
}

double negativity(const QubitMatrix& rho) {
  check_qubit_state(rho, "negativity");
  ModeLayout l({{ModeLabel::B1, 2}, {ModeLabel::B2, 2}});
  return negativity(DensityMatrix(l, DenseMatrix(rho)));
}

double bell_fidelity(const QubitMatrix& rho, double phi) {
  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  psi[2] = 1.0 / std::sqrt(2.0);
  psi[1] = std::polar(1.0 / std::sqrt(2.0), phi);
  return std::clamp((psi.adjoint() * rho * psi)(0, 0).real(), 0.0, 1.0);
}

BellFidelity bell_fidelity_max(const QubitMatrix& rho) {
  constexpr int kGrid = 64;
  const double step = 2.0 * std::numbers::pi / kGrid;
  int best = 0;
  double best_val = -1.0;
  for (int k = 0; k < kGrid; ++k) {
    const double v = bell_fidelity(rho, k * step);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  auto neg = [&](double phi) { return -bell_fidelity(rho, phi); };
  const auto r = boost::math::tools::brent_find_minima(neg, (best - 1) * step, (best + 1) * step,
                                                       std::numeric_limits<double>::digits / 2);
  BellFidelity out;
  out.value = -r.second;
  out.phi = std::remainder(r.first, 2.0 * std::numbers::pi);
  if (best_val > out.value) {
    out.value = best_val;
    out.phi = std::remainder(best * step, 2.0 * std::numbers::pi);
  }
  return out;
}

double heralding_rate(double kappa, double n) {
  if (!(kappa >= 0.0) || !(n >= 0.0)) throw std::invalid_argument("heralding_rate: inputs must be >= 0");
  // kappa / 2 pi in GHz, times n, in MHz
  return kappa / (2.0 * std::numbers::pi) * n * 1e3;
}

VisibilityFit visibility(const FringePattern& pattern, double omega_seed) {
  const auto& t = pattern.delays;
  const auto& y = pattern.intensity;
  if (t.size() != y.size()) throw std::invalid_argument("visibility: size mismatch");
  if (t.size() < 8) throw std::invalid_argument("visibility: at least 8 points required");
  VisibilityFit out;
  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  out.raw = (*mx + *mn) > 0.0 ? (*mx - *mn) / (*mx + *mn) : 0.0;

  const auto [tmin, tmax] = std::minmax_element(t.begin(), t.end());
  const double span = *tmax - *tmin;
  auto fallback = [&](const std::string& why) {
    out.fit_ok = false;
    out.visibility = out.raw;
    out.warnings.push_back(why);
    return out;
  };
  if (!(omega_seed > 0.0)) return fallback("no fringe frequency: fit skipped, raw estimator used");
  const double period_seed = 2.0 * std::numbers::pi / omega_seed;
  if (span < period_seed * (1.0 - 1e-9)) out.warnings.push_back("delays span less than one period");
  if (span > 0.0 && (t.size() - 1) * period_seed / span < 8.0) {
    out.undersampled = true;
    out.warnings.push_back("fewer than 8 points per expected period");
  }

  const double lo = 0.8 * omega_seed, hi = 1.2 * omega_seed;
  constexpr int kGrid = 401;
  double best_w = omega_seed, best_r = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int k = 0; k < kGrid; ++k) {
    const double w = lo + (hi - lo) * k / (kGrid - 1);
    const LinearFit f = fit_at(t, y, w);
    if (f.ok && f.residual < best_r) {
      best_r = f.residual;
      best_w = w;
      any = true;
    }
  }
  if (!any) return fallback("least-squares design matrix is rank deficient");
  const double h = (hi - lo) / (kGrid - 1);
  auto resid = [&](double w) {
    const LinearFit f = fit_at(t, y, w);
    return f.ok ? f.residual : std::numeric_limits<double>::infinity();
  };
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::brent_find_minima(resid, std::max(lo, best_w - h),
                                                       std::min(hi, best_w + h),
                                                       std::numeric_limits<double>::digits / 2, iters);
  if (iters >= 200) return fallback("frequency search did not converge");
  const double w = r.second <= best_r ? r.first : best_w;
  const LinearFit f = fit_at(t, y, w);
  if (!f.ok || !(f.c0 > 0.0)) return fallback("fit produced a non-positive mean");
  if (std::abs(w - lo) < 1e-6 * omega_seed || std::abs(w - hi) < 1e-6 * omega_seed)
    return fallback("fitted frequency at the search boundary");

  out.fit_ok = true;
  out.omega = w;
  out.period = 2.0 * std::numbers::pi / w;
  out.c0 = f.c0;
  out.c1 = std::hypot(f.a, f.b);
  // a cos + b sin = c1 cos(wt + phase)
  out.phase = std::atan2(-f.b, f.a);
  out.visibility = out.c1 / out.c0;
  if (out.visibility > 1.0) {
    out.warnings.push_back("fitted visibility above 1 clamped");
    out.visibility = 1.0;
  }
  return out;
}

}  // namespace heraldsim
