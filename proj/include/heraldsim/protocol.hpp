#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "heraldsim/herald.hpp"
#include "heraldsim/lindblad.hpp"
#include "heraldsim/meanfield.hpp"
#include "heraldsim/metrics.hpp"
#include "heraldsim/system.hpp"

namespace heraldsim {

enum class ReadoutRoute { Adjoint, Direct };

struct ProtocolConfig {
  SystemParams params = default_params();
  PulseSpec write;
  PulseSpec read;  // read.t0 is ignored; readout times follow from the delays

  double herald_time = 30.0;
  int herald_cavity = 1;
  HeraldFrame herald_frame = HeraldFrame::Fluctuation;
  bool allow_early_herald = false;
  bool allow_detuning_override = false;

  // t_R = t_W + readout_base_delay + delay for every entry of `delays`.
  double readout_base_delay = 70.0;
  std::vector<double> delays;
  // Sampling time relative to the readout pulse centre (negative: inside the
  // pulse, after the window start); computed when unset.
  std::optional<double> readout_offset;
  int readout_cavity = 1;
  bool readout_both_cavities = true;
  ReadoutRoute route = ReadoutRoute::Adjoint;
  // Delay indices additionally run through the direct forward route.
  std::vector<int> direct_runs = {0};
  bool zero_coherences = false;

  std::array<int, 4> cutoffs = {3, 3, 4, 4};
  double dt = 1.0 / 848.0;  // classical step, ns
  int stride = 2;           // quantum step = stride * dt during drive
  int free_stride = 16;     // quantum step = free_stride * dt elsewhere
  double quiet_threshold = 0.001;  // rad/ns, see EvolveOptions
  // Thermal tail tolerance used to size the mechanical cutoffs at T > 0.
  double thermal_tail = 1e-6;

  std::vector<double> temperatures;
  // Herald times for the scan; empty selects 1 ns spacing up to herald_time.
  std::vector<double> scan_times;

  void validate() const;
};

ProtocolConfig default_config();

// Mechanical cutoff actually used: max(configured, thermal requirement).
std::array<int, 4> effective_cutoffs(const ProtocolConfig& config);

struct HeraldPoint {
  double time = 0.0;
  double concurrence = 0.0;
  double negativity = 0.0;
  double probability = 0.0;
  double rate_mhz = 0.0;
  double qubit_weight = 0.0;
  double two_photon_contamination = 0.0;
};

struct RunDiagnostics {
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  double max_hermiticity_error = 0.0;
  int dimension = 0;
  long quantum_steps = 0;
  double quantum_step_ns = 0.0;
};

struct HeraldRunResult {
  double herald_time = 0.0;
  // First time the mechanical fluctuation occupation exceeds the classical one.
  double t_q = 0.0;
  // Same crossing for the optical and for the total occupation (diagnostic).
  double t_q_optical = -1.0;
  double t_q_total = -1.0;
  double concurrence = 0.0;
  double negativity = 0.0;
  double qubit_negativity = 0.0;
  BellFidelity fidelity;
  double herald_probability = 0.0;
  double heralding_rate_mhz = 0.0;
  double two_photon_contamination = 0.0;
  double qubit_weight = 0.0;
  double diagonal_imbalance = 0.0;  // <10|rho|10> - <01|rho|01>
  QubitMatrix rho_qubit = QubitMatrix::Zero();
  HeraldedState herald;
  std::vector<HeraldPoint> series;
  std::vector<double> times;
  std::vector<std::array<double, 4>> local_occupations;
  std::vector<double> classical_optical, classical_mechanical;
  RunDiagnostics diagnostics;
  std::array<int, 4> cutoffs{};
};

struct ReadoutSeries {
  int delay_index = 0;
  std::vector<double> times;
  std::vector<double> intensity;  // fluctuation <da_c^dag da_c> of the readout cavity
  std::vector<double> classical;  // |alpha_c|^2
  std::vector<double> mechanical; // fluctuation n_b1 + n_b2
};

struct InterferenceResult {
  FringePattern pattern;
  FringePattern pattern_other_cavity;  // empty unless both cavities were read
  std::vector<double> readout_times;
  std::vector<double> raw_intensity;
  std::vector<double> raw_intensity_other;
  std::vector<std::string> route_used;
  VisibilityFit fit;
  VisibilityFit fit_other;
  double expected_period = 0.0;
  double readout_offset = 0.0;
  double classical_intensity = 0.0;  // |alpha_c|^2 at the sampling time, reference run
  double herald_probability = 0.0;
  double concurrence = 0.0;
  // max |adjoint - direct| / max intensity over the cross-checked delays
  double route_discrepancy = 0.0;
  std::vector<ReadoutSeries> series;
  RunDiagnostics diagnostics;
};

struct TemperaturePoint {
  double temperature = 0.0;
  double n_th = 0.0;
  double negativity = 0.0;
  double concurrence = 0.0;
  double visibility = 0.0;
  double raw_visibility = 0.0;
  bool fit_ok = false;
  std::array<int, 4> cutoffs{};
};

HeraldRunResult run_write_herald(const ProtocolConfig& config);
InterferenceResult run_interference(const ProtocolConfig& config);
std::vector<TemperaturePoint> run_temperature_sweep(const ProtocolConfig& config, int workers = 1);
std::vector<HeraldPoint> scan_herald_time(const ProtocolConfig& config,
                                         const std::vector<double>& t_grid);

// Runs f(i) for i in [0, n) on up to `workers` threads; results keep index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int workers, F&& f);

}  // namespace heraldsim

#include "heraldsim/detail/parallel.hpp"
