#include "heraldsim/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "heraldsim/errors.hpp"

namespace heraldsim {

namespace {

constexpr Complex kI{0.0, 1.0};

ClassicalAmplitudes axpy(const ClassicalAmplitudes& y, double h, const ClassicalAmplitudes& k) {
  return {y.alpha_plus + h * k.alpha_plus, y.alpha_minus + h * k.alpha_minus,
          y.beta_plus + h * k.beta_plus, y.beta_minus + h * k.beta_minus};
}

bool finite(const ClassicalAmplitudes& y) {
  auto f = [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  return f(y.alpha_plus) && f(y.alpha_minus) && f(y.beta_plus) && f(y.beta_minus);
}

Complex total_drive(const std::vector<PulseSpec>& pulses, double t) {
  Complex f{0.0, 0.0};
  for (const auto& p : pulses) f += pulse_value(p, t);
  return f;
}

}  // namespace

ClassicalAmplitudes ClassicalTrajectory::at(std::size_t i) const {
  return {alpha_plus[i], alpha_minus[i], beta_plus[i], beta_minus[i]};
}

ClassicalAmplitudes ClassicalTrajectory::interpolate(double t) const {
  const double x = (t - t_start) / dt;
  if (x < -1e-9 || x > static_cast<double>(size() - 1) + 1e-9)
    throw std::invalid_argument("ClassicalTrajectory::interpolate: time outside span");
  long i = static_cast<long>(std::floor(x));
  i = std::clamp<long>(i, 0, static_cast<long>(size()) - 2);
  const double w = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
  auto lerp = [&](const std::vector<Complex>& v) { return (1.0 - w) * v[i] + w * v[i + 1]; };
  return {lerp(alpha_plus), lerp(alpha_minus), lerp(beta_plus), lerp(beta_minus)};
}

long ClassicalTrajectory::grid_index(double t) const {
  const double x = (t - t_start) / dt;
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9 || r < 0 || r > static_cast<double>(size() - 1)) return -1;
  return static_cast<long>(r);
}

double ClassicalTrajectory::optical_occupation(std::size_t i) const {
  return std::norm(alpha_plus[i]) + std::norm(alpha_minus[i]);
}

double ClassicalTrajectory::mechanical_occupation(std::size_t i) const {
  return std::norm(beta_plus[i]) + std::norm(beta_minus[i]);
}

ClassicalAmplitudes classical_rhs(const SystemParams& p, const ClassicalAmplitudes& y,
                                  Complex drive) {
  const double gs2 = p.g * std::sqrt(2.0);
  const double gh = p.g / std::sqrt(2.0);
  const double jm = p.mechanical_coupling ? p.J_m : 0.0;
  const double rbp = y.beta_plus.real(), rbm = y.beta_minus.real();
  const Complex fd = drive / std::sqrt(2.0);
  ClassicalAmplitudes d;
  d.alpha_plus = -kI * ((p.J_c + gs2 * rbp - 0.5 * kI * p.kappa_plus) * y.alpha_plus +
                        gs2 * rbm * y.alpha_minus + fd);
  d.alpha_minus = -kI * ((-p.J_c + gs2 * rbp - 0.5 * kI * p.kappa_minus) * y.alpha_minus +
                         gs2 * rbm * y.alpha_plus + fd);
  const Complex wb = p.Omega_plus() - 0.5 * kI * p.gamma;
  const double src_p = std::norm(y.alpha_plus) + std::norm(y.alpha_minus);
  const double src_m = 2.0 * (std::conj(y.alpha_plus) * y.alpha_minus).real();
  d.beta_plus = -kI * ((wb + jm) * y.beta_plus + p.Omega_minus() * y.beta_minus + gh * src_p);
  d.beta_minus = -kI * ((wb - jm) * y.beta_minus + p.Omega_minus() * y.beta_plus + gh * src_m);
  return d;
}

ClassicalTrajectory integrate_classical(const SystemParams& params,
                                        const std::vector<PulseSpec>& pulses, double t_end,
                                        double dt,
                                        const std::optional<ClassicalAmplitudes>& initial,
                                        double t_start) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_classical: dt must be positive");
  if (dt > max_time_step(params) * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << std::setprecision(6) << "integrate_classical: dt = " << dt
       << " ns exceeds the stability bound " << max_time_step(params) << " ns";
    throw std::invalid_argument(os.str());
  }
  if (!(t_end > t_start)) throw std::invalid_argument("integrate_classical: t_end must exceed start");
  for (const auto& p : pulses) p.validate();

  const std::size_t steps = static_cast<std::size_t>(std::ceil((t_end - t_start) / dt - 1e-9));
  ClassicalTrajectory tr;
  tr.t_start = t_start;
  tr.dt = dt;
  tr.alpha_plus.reserve(steps + 1);
  tr.alpha_minus.reserve(steps + 1);
  tr.beta_plus.reserve(steps + 1);
  tr.beta_minus.reserve(steps + 1);
  ClassicalAmplitudes y = initial.value_or(ClassicalAmplitudes{});
  auto push = [&](const ClassicalAmplitudes& v) {
    tr.alpha_plus.push_back(v.alpha_plus);
    tr.alpha_minus.push_back(v.alpha_minus);
    tr.beta_plus.push_back(v.beta_plus);
    tr.beta_minus.push_back(v.beta_minus);
  };
  push(y);
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = t_start + static_cast<double>(n) * dt;
    const Complex f0 = total_drive(pulses, t);
    const Complex fh = total_drive(pulses, t + 0.5 * dt);
    const Complex f1 = total_drive(pulses, t + dt);
    const ClassicalAmplitudes k1 = classical_rhs(params, y, f0);
    const ClassicalAmplitudes k2 = classical_rhs(params, axpy(y, 0.5 * dt, k1), fh);
    const ClassicalAmplitudes k3 = classical_rhs(params, axpy(y, 0.5 * dt, k2), fh);
    const ClassicalAmplitudes k4 = classical_rhs(params, axpy(y, dt, k3), f1);
    y.alpha_plus += dt / 6.0 * (k1.alpha_plus + 2.0 * k2.alpha_plus + 2.0 * k3.alpha_plus + k4.alpha_plus);
    y.alpha_minus += dt / 6.0 * (k1.alpha_minus + 2.0 * k2.alpha_minus + 2.0 * k3.alpha_minus + k4.alpha_minus);
    y.beta_plus += dt / 6.0 * (k1.beta_plus + 2.0 * k2.beta_plus + 2.0 * k3.beta_plus + k4.beta_plus);
    y.beta_minus += dt / 6.0 * (k1.beta_minus + 2.0 * k2.beta_minus + 2.0 * k3.beta_minus + k4.beta_minus);
    if (!finite(y)) {
      std::ostringstream os;
      os << "integrate_classical: non-finite amplitude at t = " << std::setprecision(10)
         << (t + dt) << " ns";
      throw DivergenceError(os.str());
    }
    push(y);
  }
  return tr;
}

std::pair<Complex, Complex> local_from_normal(Complex plus, Complex minus) {
  const double r = 1.0 / std::sqrt(2.0);
  return {r * (plus + minus), r * (plus - minus)};
}

std::pair<Complex, Complex> normal_from_local(Complex one, Complex two) {
  return local_from_normal(one, two);
}

void write_classical_csv(std::ostream& os, const ClassicalTrajectory& traj, std::size_t stride) {
  if (stride == 0) stride = 1;
  os << "# classical amplitudes, optical frame omega_c, time in ns\n";
  os << "t_ns,re_alpha_plus,im_alpha_plus,re_alpha_minus,im_alpha_minus,"
        "re_beta_plus,im_beta_plus,re_beta_minus,im_beta_minus\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); i += stride) {
    os << traj.time(i) << ',' << traj.alpha_plus[i].real() << ',' << traj.alpha_plus[i].imag()
       << ',' << traj.alpha_minus[i].real() << ',' << traj.alpha_minus[i].imag() << ','
       << traj.beta_plus[i].real() << ',' << traj.beta_plus[i].imag() << ','
       << traj.beta_minus[i].real() << ',' << traj.beta_minus[i].imag() << '\n';
  }
}

}  // namespace heraldsim
