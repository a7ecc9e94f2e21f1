#pragma once

#include <iosfwd>

#include "heraldsim/fockspace.hpp"
#include "heraldsim/meanfield.hpp"

namespace heraldsim {

typedef Eigen::Matrix4cd QubitMatrix;

enum class BasisDirection { NormalToLocal, LocalToNormal };

// Which state the herald projector acts on. Fluctuation: the displaced-frame
// density matrix directly (classical pump field filtered out). Full: the state
// rebuilt with the classical coherent amplitudes first.
enum class HeraldFrame { Fluctuation, Full };

struct ReconstructedState {
  DensityMatrix rho;
  double unitarity_deviation = 0.0;
};

// D(alpha+) x D(alpha-) x D(beta+) x D(beta-) rho D^dag with amplitudes at t.
ReconstructedState reconstruct_full(const DensityMatrix& rho_fluct,
                                    const ClassicalTrajectory& classical, double t, int pad = 8);
ReconstructedState reconstruct_full(const DensityMatrix& rho_fluct, const ClassicalAmplitudes& c,
                                    int pad = 8);

// Two-mode 50/50 rotation W on cutoff x cutoff Fock levels:
// W A^dag W^dag = (A^dag + B^dag)/sqrt2, W B^dag W^dag = (A^dag - B^dag)/sqrt2, W^2 = 1.
// Cached per cutoff.
const DenseMatrix& beam_splitter(int cutoff);

DensityMatrix optical_basis_rotation(const DensityMatrix& rho, BasisDirection direction);
DensityMatrix mechanical_basis_rotation(const DensityMatrix& rho, BasisDirection direction);

struct HeraldedState {
  DensityMatrix rho_full;  // projected, optical sector in the local basis
  DensityMatrix rho_mech;  // (b1, b2)
  QubitMatrix rho_qubit;   // renormalized {0,1}x{0,1} block, order |00>,|01>,|10>,|11>
  double qubit_weight = 0.0;
  double herald_probability = 0.0;
  double herald_time = 0.0;
  int cavity = 1;
  // Optical photon-number weights of the pre-projection state.
  double single_photon_weight = 0.0;  // P(N_opt = 1)
  double multi_photon_weight = 0.0;   // P(N_opt >= 2)
  double two_photon_contamination = 0.0;  // ratio of the two
  double unitarity_deviation = 0.0;
};

// Photon-number weights P(N_opt = 1), P(N_opt >= 2) of a canonical-layout state.
std::pair<double, double> optical_photon_weights(const DensityMatrix& rho);

HeraldedState herald_single_photon(const DensityMatrix& rho_full, int cavity);

HeraldedState herald_at(const DensityMatrix& rho_fluct, const ClassicalTrajectory& classical,
                        double t, int cavity, HeraldFrame frame = HeraldFrame::Fluctuation);

// Herald projection carried back to the canonical normal-mode layout:
// P rho P / p with P the local single-photon projector of `cavity`. Weight
// pushed beyond the canonical cutoffs is dropped and reported in lost_weight.
DensityMatrix project_in_normal_basis(const DensityMatrix& rho, int cavity,
                                      double* probability = nullptr,
                                      double* lost_weight = nullptr);

// Removes every coherence between distinct local phonon-number states
// |n1, n2> (b1, b2) of a canonical-layout state.
DensityMatrix dephase_local_mechanics(const DensityMatrix& rho, double* lost_weight = nullptr);

QubitMatrix qubit_block(const DensityMatrix& rho_mech, double* weight = nullptr);

// JSON object with basis order, retained weight and row-major re/im pairs.
void write_qubit_json(std::ostream& os, const HeraldedState& h);

}  // namespace heraldsim
