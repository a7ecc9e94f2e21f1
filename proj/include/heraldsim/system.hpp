#pragma once

#include <array>
#include <numbers>
#include <string>
#include <vector>

#include "heraldsim/fockspace.hpp"

namespace heraldsim {

// Internal units: time in ns, frequencies in rad/ns.
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double ghz(double f) { return kTwoPi * f; }
inline constexpr double mhz(double f) { return kTwoPi * f * 1e-3; }
inline constexpr double khz(double f) { return kTwoPi * f * 1e-6; }
inline constexpr double to_ghz(double w) { return w / kTwoPi; }

struct SystemParams {
  double J_c = 0.0;
  double kappa_plus = 0.0;
  double kappa_minus = 0.0;
  double Omega_1 = 0.0;
  double Omega_2 = 0.0;
  double g = 0.0;
  double gamma = 0.0;
  double temperature = 0.0;
  // Waveguide-induced mechanical splitting J_m (b1^dag b2 + h.c.), off by default.
  bool mechanical_coupling = false;
  double J_m = 0.0;

  double Omega_plus() const { return 0.5 * (Omega_1 + Omega_2); }
  double Omega_minus() const { return 0.5 * (Omega_1 - Omega_2); }
  // Bath occupation shared by both mechanical normal modes (evaluated at Omega_plus).
  double n_th() const;

  // Throws std::invalid_argument naming the offending field; returns warnings.
  std::vector<std::string> validate() const;
};

SystemParams default_params();

double thermal_occupation(double Omega, double T);

// Largest step accepted by the classical integrator: (2 pi / max(J_c, Omega_plus)) / 50.
double max_time_step(const SystemParams& params);

struct PulseSpec {
  double t0 = 0.0;
  double sigma = 1.0;
  double amplitude = 0.0;  // rad/ns
  double detuning = 0.0;   // rad/ns, carrier minus omega_c
  double phase = 0.0;

  void validate() const;
};

Complex pulse_value(const PulseSpec& p, double t);
double pulse_envelope(const PulseSpec& p, double t);

// Optical modes in the frame rotating at omega_c, mechanics in the lab frame.
struct FrameConvention {
  std::string optical_reference = "omega_c";
  std::string mechanical_reference = "lab";
  std::vector<std::string> dropped_terms = {
      "purely classical constants",
      "terms linear in a single fluctuation operator (cancelled by the mean-field equations)"};
};

const FrameConvention& frame_convention();

struct ClassicalAmplitudes {
  Complex alpha_plus{0.0, 0.0};
  Complex alpha_minus{0.0, 0.0};
  Complex beta_plus{0.0, 0.0};
  Complex beta_minus{0.0, 0.0};
};

// The fluctuation Hamiltonian as a sum of fixed ladder-operator monomials
// with amplitude-dependent coefficients. Each monomial rotates at a definite
// frequency under H0 = J_c(n_a+ - n_a-) + Omega_plus(n_b+ + n_b-), and is a
// single diagonal band of the matrix: O(i, i - offset) = weight(i).
class FluctuationTerms {
 public:
  static constexpr int kCount = 30;
  typedef std::array<Complex, kCount> Coefficients;

  struct Monomial {
    int offset = 0;
    Eigen::VectorXd weight;
    double frequency = 0.0;
  };

  FluctuationTerms(const ModeLayout& layout, const SystemParams& params);

  const ModeLayout& layout() const { return layout_; }
  const Monomial& monomial(int k) const { return mono_[k]; }
  double frequency(int k) const { return mono_[k].frequency; }
  const std::vector<double>& h0_diagonal() const { return h0_diag_; }
  const std::vector<int>& band_offsets() const { return band_offset_; }

  Coefficients coefficients(const SystemParams& params, const ClassicalAmplitudes& c) const;
  // Coefficients with the H0 part removed (interaction picture, before phases).
  Coefficients interaction_coefficients(const SystemParams& params,
                                        const ClassicalAmplitudes& c) const;

  DenseMatrix dense(const Coefficients& coeffs) const;
  // Band values: bands[b](i) = H(i, i - band_offsets()[b]).
  void assemble(const Coefficients& coeffs, std::vector<Eigen::VectorXcd>& bands) const;

 private:
  ModeLayout layout_;
  std::array<Monomial, kCount> mono_;
  std::array<int, kCount> band_of_{};
  std::vector<int> band_offset_;
  std::vector<double> h0_diag_;
};

// out += H * x for H given in band form; x and out are dim x dim.
void apply_bands(const std::vector<int>& offsets, const std::vector<Eigen::VectorXcd>& bands,
                 const DenseMatrix& x, DenseMatrix& out);

FockOperator build_fluctuation_hamiltonian(const SystemParams& params, Complex alpha_plus,
                                           Complex alpha_minus, Complex beta_plus,
                                           Complex beta_minus, const ModeLayout& layout);

}  // namespace heraldsim
