#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "heraldsim/system.hpp"

namespace heraldsim {

struct ClassicalTrajectory {
  double t_start = 0.0;
  double dt = 0.0;
  std::vector<Complex> alpha_plus;
  std::vector<Complex> alpha_minus;
  std::vector<Complex> beta_plus;
  std::vector<Complex> beta_minus;

  std::size_t size() const { return alpha_plus.size(); }
  double time(std::size_t i) const { return t_start + static_cast<double>(i) * dt; }
  double t_end() const { return time(size() - 1); }
  ClassicalAmplitudes at(std::size_t i) const;
  // Linear interpolation between grid points; t must lie inside the span.
  ClassicalAmplitudes interpolate(double t) const;
  // Grid index of t when t is a grid point within 1e-9 dt, else -1.
  long grid_index(double t) const;

  double optical_occupation(std::size_t i) const;
  double mechanical_occupation(std::size_t i) const;
};

ClassicalTrajectory integrate_classical(const SystemParams& params,
                                        const std::vector<PulseSpec>& pulses, double t_end,
                                        double dt,
                                        const std::optional<ClassicalAmplitudes>& initial = {},
                                        double t_start = 0.0);

// Right-hand side of the mean-field equations, exposed for diagnostics.
ClassicalAmplitudes classical_rhs(const SystemParams& params, const ClassicalAmplitudes& y,
                                  Complex drive);

std::pair<Complex, Complex> local_from_normal(Complex plus, Complex minus);
std::pair<Complex, Complex> normal_from_local(Complex one, Complex two);

// Columns t_ns, re/im of alpha+, alpha-, beta+, beta-; every `stride`-th point.
void write_classical_csv(std::ostream& os, const ClassicalTrajectory& traj, std::size_t stride = 1);

}  // namespace heraldsim
