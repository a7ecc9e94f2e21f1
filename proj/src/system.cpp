#include "heraldsim/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heraldsim {

namespace {

constexpr double kHbar = 1.054571817e-34;  // J s
constexpr double kBoltzmann = 1.380649e-23;  // J/K

}  // namespace

double SystemParams::n_th() const { return thermal_occupation(Omega_plus(), temperature); }

std::vector<std::string> SystemParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("SystemParams: ") + name + " must be positive");
  };
  positive(J_c, "J_c");
  positive(kappa_plus, "kappa_plus");
  positive(kappa_minus, "kappa_minus");
  positive(Omega_1, "Omega_1");
  positive(Omega_2, "Omega_2");
  positive(g, "g");
  positive(gamma, "gamma");
  if (!(temperature >= 0.0) || !std::isfinite(temperature))
    throw std::invalid_argument("SystemParams: temperature must be >= 0");
  if (mechanical_coupling && !(J_m >= 0.0))
    throw std::invalid_argument("SystemParams: J_m must be >= 0");
  std::vector<std::string> warnings;
  if (kappa_plus > 0.1 * Omega_plus() || kappa_minus > 0.1 * Omega_plus())
    warnings.emplace_back("optical linewidth not small against Omega_plus: sidebands unresolved");
  return warnings;
}

SystemParams default_params() {
  SystemParams p;
  p.J_c = ghz(8.45);
  p.kappa_minus = mhz(338.0);
  p.kappa_plus = mhz(486.0);
  p.Omega_1 = ghz(5.08);
  p.Omega_2 = ghz(5.13);
  p.g = mhz(0.86);
  p.gamma = khz(3.75);
  p.temperature = 0.0;
  p.mechanical_coupling = false;
  p.J_m = khz(4.4);
  return p;
}

double thermal_occupation(double Omega, double T) {
  if (!(Omega > 0.0)) throw std::invalid_argument("thermal_occupation: Omega must be positive");
  if (!(T >= 0.0)) throw std::invalid_argument("thermal_occupation: T must be >= 0");
  if (T == 0.0) return 0.0;
  const double x = kHbar * Omega * 1e9 / (kBoltzmann * T);
  return 1.0 / std::expm1(x);
}

double max_time_step(const SystemParams& params) {
  return (kTwoPi / std::max(params.J_c, params.Omega_plus())) / 50.0;
}

void PulseSpec::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("PulseSpec: sigma must be positive");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("PulseSpec: amplitude must be >= 0");
}

double pulse_envelope(const PulseSpec& p, double t) {
  const double u = (t - p.t0) / p.sigma;
  return p.amplitude * std::exp(-0.5 * u * u);
}

Complex pulse_value(const PulseSpec& p, double t) {
  return pulse_envelope(p, t) * std::polar(1.0, -p.detuning * t + p.phase);
}

const FrameConvention& frame_convention() {
  static const FrameConvention fc;
  return fc;
}

namespace {

// Monomial table. Index layout documented next to coefficients().
enum Op : int { AP = 0, AM = 1, BP = 2, BM = 3 };

struct Factor {
  int mode;
  bool dagger;
};

}  // namespace

FluctuationTerms::FluctuationTerms(const ModeLayout& layout, const SystemParams& params)
    : layout_(layout) {
  if (!layout.is_canonical())
    throw std::invalid_argument("FluctuationTerms: layout must be canonical (a+, a-, b+, b-)");
  static const ModeLabel labels[4] = {ModeLabel::APlus, ModeLabel::AMinus, ModeLabel::BPlus,
                                      ModeLabel::BMinus};
  const double w[4] = {params.J_c, -params.J_c, params.Omega_plus(), params.Omega_plus()};
  SparseMatrix a[4], ad[4];
  for (int m = 0; m < 4; ++m) {
    const DenseMatrix d = destroy(layout.cutoff(labels[m]));
    a[m] = embed_sparse(d, labels[m], layout);
    ad[m] = embed_sparse(d.adjoint(), labels[m], layout);
  }
  auto product = [&](std::initializer_list<Factor> fs, double& freq) {
    SparseMatrix r;
    bool first = true;
    freq = 0.0;
    for (const Factor& f : fs) {
      const SparseMatrix& o = f.dagger ? ad[f.mode] : a[f.mode];
      freq += f.dagger ? w[f.mode] : -w[f.mode];
      if (first) {
        r = o;
        first = false;
      } else {
        r = SparseMatrix(r * o);
      }
    }
    return r;
  };
  const int dim = layout.total_dim();
  auto to_band = [&](const SparseMatrix& m, double freq) {
    Monomial mono;
    mono.frequency = freq;
    mono.weight = Eigen::VectorXd::Zero(dim);
    bool have_offset = false;
    for (int r = 0; r < m.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
        if (it.value() == 0.0) continue;
        const int off = static_cast<int>(it.row() - it.col());
        if (have_offset && off != mono.offset)
          throw std::logic_error("FluctuationTerms: monomial is not a single band");
        mono.offset = off;
        have_offset = true;
        mono.weight[it.row()] = it.value().real();
      }
    }
    return mono;
  };
  int k = 0;
  auto add = [&](std::initializer_list<Factor> fs) {
    double f;
    SparseMatrix m = product(fs, f);
    mono_[k++] = to_band(m, f);
  };
  // 0-5: number operators and mechanical mixing.
  add({{AP, true}, {AP, false}});
  add({{AM, true}, {AM, false}});
  add({{BP, true}, {BP, false}});
  add({{BM, true}, {BM, false}});
  add({{BP, true}, {BM, false}});
  add({{BM, true}, {BP, false}});
  // 6-7: optical normal-mode exchange.
  add({{AP, true}, {AM, false}});
  add({{AM, true}, {AP, false}});
  // 8-15: optical operator times X+ = b+ + b+^dag.
  for (int opt : {AP, AM})
    for (bool od : {false, true})
      for (bool md : {false, true}) add({{opt, od}, {BP, md}});
  // 16-23: optical operator times X- = b- + b-^dag.
  for (int opt : {AP, AM})
    for (bool od : {false, true})
      for (bool md : {false, true}) add({{opt, od}, {BM, md}});
  // 24-25: cubic (n_a+ + n_a-) X+.
  for (bool md : {false, true}) {
    double f;
    SparseMatrix n = product({{AP, true}, {AP, false}}, f) + product({{AM, true}, {AM, false}}, f);
    SparseMatrix m = SparseMatrix(n * (md ? ad[BP] : a[BP]));
    mono_[k++] = to_band(m, md ? w[BP] : -w[BP]);
  }
  // 26-29: cubic (a+^dag a- + a-^dag a+) X-, split by rotation frequency.
  add({{AP, true}, {AM, false}, {BM, false}});
  add({{AP, true}, {AM, false}, {BM, true}});
  add({{AM, true}, {AP, false}, {BM, false}});
  add({{AM, true}, {AP, false}, {BM, true}});
  if (k != kCount) throw std::logic_error("FluctuationTerms: monomial count mismatch");

  h0_diag_.assign(dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    const auto d = layout.digits(i);
    h0_diag_[i] = w[0] * d[0] + w[1] * d[1] + w[2] * (d[2] + d[3]);
  }
  for (int j = 0; j < kCount; ++j) {
    auto it = std::find(band_offset_.begin(), band_offset_.end(), mono_[j].offset);
    if (it == band_offset_.end()) {
      band_of_[j] = static_cast<int>(band_offset_.size());
      band_offset_.push_back(mono_[j].offset);
    } else {
      band_of_[j] = static_cast<int>(it - band_offset_.begin());
    }
  }
}

// Coefficient k multiplies monomial k; s = g / sqrt(2).
FluctuationTerms::Coefficients FluctuationTerms::coefficients(const SystemParams& params,
                                                              const ClassicalAmplitudes& c) const {
  const double s = params.g / std::sqrt(2.0);
  const double jm = params.mechanical_coupling ? params.J_m : 0.0;
  const Complex ap = c.alpha_plus, am = c.alpha_minus;
  const Complex apc = std::conj(ap), amc = std::conj(am);
  Coefficients k{};
  k[0] = params.J_c + 2.0 * s * c.beta_plus.real();
  k[1] = -params.J_c + 2.0 * s * c.beta_plus.real();
  k[2] = params.Omega_plus() + jm;
  k[3] = params.Omega_plus() - jm;
  k[4] = params.Omega_minus();
  k[5] = params.Omega_minus();
  k[6] = 2.0 * s * c.beta_minus.real();
  k[7] = k[6];
  // X+ couples to alpha+^* a+ + alpha+ a+^dag + alpha-^* a- + alpha- a-^dag.
  const Complex xp[4] = {s * apc, s * ap, s * amc, s * am};
  // X- couples to alpha-^* a+ + alpha- a+^dag + alpha+^* a- + alpha+ a-^dag.
  const Complex xm[4] = {s * amc, s * am, s * apc, s * ap};
  for (int o = 0; o < 4; ++o) {
    k[8 + 2 * o] = xp[o];
    k[8 + 2 * o + 1] = xp[o];
    k[16 + 2 * o] = xm[o];
    k[16 + 2 * o + 1] = xm[o];
  }
  for (int j = 24; j < 30; ++j) k[j] = s;
  return k;
}

FluctuationTerms::Coefficients FluctuationTerms::interaction_coefficients(
    const SystemParams& params, const ClassicalAmplitudes& c) const {
  Coefficients k = coefficients(params, c);
  k[0] -= params.J_c;
  k[1] += params.J_c;
  k[2] -= params.Omega_plus();
  k[3] -= params.Omega_plus();
  return k;
}

DenseMatrix FluctuationTerms::dense(const Coefficients& coeffs) const {
  const int dim = layout_.total_dim();
  DenseMatrix h = DenseMatrix::Zero(dim, dim);
  for (int j = 0; j < kCount; ++j) {
    const Monomial& m = mono_[j];
    for (int i = 0; i < dim; ++i) {
      if (m.weight[i] == 0.0) continue;
      h(i, i - m.offset) += coeffs[j] * m.weight[i];
    }
  }
  return h;
}

void FluctuationTerms::assemble(const Coefficients& coeffs,
                                std::vector<Eigen::VectorXcd>& bands) const {
  const int dim = layout_.total_dim();
  bands.resize(band_offset_.size());
  for (auto& b : bands) b.setZero(dim);
  for (int j = 0; j < kCount; ++j) {
    if (coeffs[j] == 0.0) continue;
    bands[band_of_[j]] += coeffs[j] * mono_[j].weight.cast<Complex>();
  }
}

void apply_bands(const std::vector<int>& offsets, const std::vector<Eigen::VectorXcd>& bands,
                 const DenseMatrix& x, DenseMatrix& out) {
  const int dim = static_cast<int>(x.rows());
  const int cols = static_cast<int>(x.cols());
  for (int c = 0; c < cols; ++c) {
    Complex* q = out.col(c).data();
    const Complex* xs = x.col(c).data();
    for (std::size_t b = 0; b < offsets.size(); ++b) {
      const int d = offsets[b];
      const int lo = std::max(0, d);
      const int len = dim - std::abs(d);
      if (len <= 0) continue;
      Eigen::Map<Eigen::VectorXcd>(q + lo, len) +=
          Eigen::Map<const Eigen::VectorXcd>(bands[b].data() + lo, len)
              .cwiseProduct(Eigen::Map<const Eigen::VectorXcd>(xs + lo - d, len));
    }
  }
}

FockOperator build_fluctuation_hamiltonian(const SystemParams& params, Complex alpha_plus,
                                           Complex alpha_minus, Complex beta_plus,
                                           Complex beta_minus, const ModeLayout& layout) {
  FluctuationTerms terms(layout, params);
  ClassicalAmplitudes c{alpha_plus, alpha_minus, beta_plus, beta_minus};
  DenseMatrix h = terms.dense(terms.coefficients(params, c));
  return FockOperator(layout, std::move(h));
}

}  // namespace heraldsim
