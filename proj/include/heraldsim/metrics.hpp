#pragma once

#include <string>
#include <vector>

#include "heraldsim/fockspace.hpp"
#include "heraldsim/herald.hpp"

namespace heraldsim {

// Wootters concurrence. Throws InvalidState when rho is not a density matrix
// within 1e-8.
double concurrence(const QubitMatrix& rho);

// ||rho^T_2||_1 - 1 on a two-mode state (partial transpose on the second mode).
double negativity(const DensityMatrix& rho_mech);
double negativity(const QubitMatrix& rho);

// <psi|rho|psi>, psi = (|10> + e^{i phi}|01>)/sqrt2.
double bell_fidelity(const QubitMatrix& rho, double phi);

struct BellFidelity {
  double value = 0.0;
  double phi = 0.0;
  std::string convention = "probability <psi|rho|psi>";
};

// Maximum over phi by numerical search.
BellFidelity bell_fidelity_max(const QubitMatrix& rho);

// nu = (kappa / 2 pi) n in MHz for kappa in rad/ns: the linewidth quoted as an
// ordinary frequency times the occupation.
double heralding_rate(double kappa, double n);

struct FringePattern {
  std::vector<double> delays;      // ns
  std::vector<double> intensity;   // normalized to the pattern mean
  double readout_offset = 0.0;     // ns after the readout pulse centre
};

struct VisibilityFit {
  double visibility = 0.0;  // fitted |c1|/c0, or raw when the fit failed
  double raw = 0.0;         // (max - min)/(max + min)
  double c0 = 0.0;
  double c1 = 0.0;
  double phase = 0.0;
  double omega = 0.0;  // fitted angular frequency, rad/ns
  double period = 0.0; // ns, 0 when undefined
  bool fit_ok = false;
  bool undersampled = false;
  std::vector<std::string> warnings;
};

// Least-squares fit of c0 + c1 cos(omega t + phase), omega searched within
// +-20% of omega_seed. omega_seed <= 0 disables the fit.
VisibilityFit visibility(const FringePattern& pattern, double omega_seed);

}  // namespace heraldsim
