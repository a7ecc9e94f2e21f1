#pragma once

#include <array>
#include <memory>
#include <vector>

#include "heraldsim/fockspace.hpp"
#include "heraldsim/meanfield.hpp"
#include "heraldsim/system.hpp"

namespace heraldsim {

struct BathSpec {
  double kappa_plus = 0.0;
  double kappa_minus = 0.0;
  double gamma = 0.0;
  double n_th_optical = 0.0;
  double n_th_mechanical = 0.0;

  static BathSpec from_params(const SystemParams& params);
  void validate() const;
};

struct EvolveOptions {
  // Quantum step = stride * classical dt while the classical coupling
  // g/sqrt2 max|alpha| + g sqrt2 max|beta| exceeds quiet_threshold, and
  // free_stride * dt otherwise. Even strides keep every RK4 stage on the
  // classical grid.
  int stride = 2;
  int free_stride = 16;
  double quiet_threshold = 0.001;  // rad/ns
  // Remove H0 = J_c(n_a+ - n_a-) + Omega_plus(n_b+ + n_b-) exactly; otherwise
  // integrate the full H_d in the omega_c frame.
  bool interaction_picture = true;
  bool check_positivity = true;
  double trace_failure = 1e-6;
  double positivity_failure = 1e-6;
  bool keep_snapshots = true;
};

struct QuantumTrajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> snapshots;
  // <n> of a+, a-, b+, b- and of the local modes a1, a2, b1, b2.
  std::vector<std::array<double, 4>> normal_occupations;
  std::vector<std::array<double, 4>> local_occupations;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  double max_hermiticity_error = 0.0;
};

// Local-mode occupations from normal-mode second moments:
// n_1 = (n_+ + n_- + 2 Re<c_+^dag c_->) / 2, n_2 = (n_+ + n_- - 2 Re<c_+^dag c_->) / 2.
std::array<double, 4> local_occupations(const DensityMatrix& rho);
std::array<double, 4> normal_occupations(const DensityMatrix& rho);

// Fixed-step RK4 propagator for the fluctuation master equation, driven by a
// precomputed classical trajectory.
class Propagator {
 public:
  Propagator(const ClassicalTrajectory& classical, const SystemParams& params,
             const BathSpec& baths, const ModeLayout& layout, EvolveOptions options = {});
  ~Propagator();
  Propagator(Propagator&&) noexcept;
  Propagator& operator=(Propagator&&) noexcept;

  // Drive-window step.
  double step() const;
  double time() const;
  long steps_taken() const;

  void reset(const DensityMatrix& rho, double t);
  void advance_to(double t);
  DensityMatrix state() const;
  // Running diagnostics since the last reset.
  double max_trace_drift() const;

  // Heisenberg-picture evolution: returns M(t_initial) with
  // Tr[M(t_initial) rho(t_initial)] = Tr[O rho(t_final)] for every rho(t_initial).
  DenseMatrix evolve_observable_backward(const DenseMatrix& observable, double t_final,
                                         double t_initial);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

QuantumTrajectory evolve(const DensityMatrix& rho0, const ClassicalTrajectory& classical,
                         const SystemParams& params, const BathSpec& baths,
                         const std::vector<double>& sample_times, EvolveOptions options = {},
                         double t_initial = -1.0);

DensityMatrix thermal_state(double n_th, int cutoff, ModeLabel label = ModeLabel::BPlus,
                            double tail_tolerance = 1e-6);
// Smallest cutoff whose truncated geometric tail is below tol.
int thermal_cutoff(double n_th, double tol = 1e-6);

// Columns t_ns, n_a_plus, n_a_minus, n_b_plus, n_b_minus, n_a1, n_a2, n_b1, n_b2.
void write_occupation_csv(std::ostream& os, const QuantumTrajectory& traj);

}  // namespace heraldsim
