#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace heraldsim {

using Complex = std::complex<double>;
typedef Eigen::MatrixXcd DenseMatrix;
typedef Eigen::VectorXcd StateVector;
typedef Eigen::SparseMatrix<Complex, Eigen::RowMajor> SparseMatrix;

// Normal modes (a+, a-, b+, b-) are the simulation basis. Local labels
// appear only after an explicit basis rotation.
enum class ModeLabel { APlus, AMinus, BPlus, BMinus, A1, A2, B1, B2 };

std::string_view to_string(ModeLabel label);

struct ModeSpec {
  ModeLabel label;
  int cutoff;
};

class ModeLayout {
 public:
  ModeLayout() = default;
  explicit ModeLayout(std::vector<ModeSpec> modes);

  static ModeLayout canonical(int a_plus, int a_minus, int b_plus, int b_minus);

  const std::vector<ModeSpec>& modes() const { return modes_; }
  int num_modes() const { return static_cast<int>(modes_.size()); }
  int total_dim() const { return total_dim_; }
  bool contains(ModeLabel label) const;
  int position(ModeLabel label) const;
  int cutoff(ModeLabel label) const;
  // Distance in the flat index between consecutive Fock levels of a mode.
  int stride(ModeLabel label) const;
  bool is_canonical() const;

  // Occupation of `label` in the basis state with flat index `index`.
  int occupation(int index, ModeLabel label) const;
  std::vector<int> digits(int index) const;
  int index(std::span<const int> digits) const;

  ModeLayout subset(std::span<const ModeLabel> keep) const;
  ModeLayout relabeled(ModeLabel from, ModeLabel to) const;

  bool operator==(const ModeLayout& other) const;

 private:
  std::vector<ModeSpec> modes_;
  std::vector<int> strides_;
  int total_dim_ = 1;
};

struct FockOperator {
  ModeLayout layout;
  DenseMatrix matrix;

  FockOperator() = default;
  FockOperator(ModeLayout layout, DenseMatrix matrix);
};

class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(ModeLayout layout, DenseMatrix matrix);

  static DensityMatrix from_pure(const ModeLayout& layout, const StateVector& psi);
  static DensityMatrix basis_state(const ModeLayout& layout, std::span<const int> occupations);

  const ModeLayout& layout() const { return layout_; }
  const DenseMatrix& matrix() const { return matrix_; }
  DenseMatrix& matrix() { return matrix_; }
  int dim() const { return layout_.total_dim(); }

  Complex trace() const { return matrix_.trace(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;
  double expectation(const DenseMatrix& op) const;
  double occupation(ModeLabel label) const;

  // Throws InvalidState when the density-matrix tolerances are violated.
  void validate(double herm_tol = 1e-10, double trace_tol = 1e-8,
                double eig_tol = 1e-8) const;

 private:
  ModeLayout layout_;
  DenseMatrix matrix_;
};

DenseMatrix destroy(int cutoff);
DenseMatrix number_op(int cutoff);

FockOperator embed(const DenseMatrix& op, ModeLabel slot, const ModeLayout& layout);
SparseMatrix embed_sparse(const DenseMatrix& op, ModeLabel slot, const ModeLayout& layout);

struct Displacement {
  DenseMatrix unitary;
  // Weight of D|0> lost beyond the retained block.
  double unitarity_deviation = 0.0;
};

Displacement displacement(Complex amplitude, int cutoff, int pad = 8);

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const ModeLabel> keep);
DenseMatrix partial_transpose(const DenseMatrix& matrix, const ModeLayout& layout,
                              ModeLabel subsystem);
inline DenseMatrix partial_transpose(const DensityMatrix& rho, ModeLabel subsystem) {
  return partial_transpose(rho.matrix(), rho.layout(), subsystem);
}

std::pair<DensityMatrix, double> project_and_normalize(const DensityMatrix& rho,
                                                        const FockOperator& projector);

// Tensor product; the layouts are concatenated in argument order.
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// Projector onto a fixed occupation of one mode, identity elsewhere.
FockOperator number_projector(const ModeLayout& layout, ModeLabel slot, int n);

}  // namespace heraldsim
