#pragma once

#include <string>
#include <vector>

namespace heraldsim {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured error (or metric) compared against tolerance
  double tolerance = 0.0;
  std::string detail;
};

// Fast oracle suite behind `heraldsim validate`: closed-form open-system,
// metric and Fock-space checks plus an independent classical integration.
std::vector<CheckResult> run_validation();

CheckResult check_single_mode_decay();
CheckResult check_thermal_fixed_point();
CheckResult check_werner_states();
CheckResult check_bell_states();
CheckResult check_product_states();
CheckResult check_coherent_state();
CheckResult check_partial_trace();
CheckResult check_classical_dopri();

}  // namespace heraldsim
