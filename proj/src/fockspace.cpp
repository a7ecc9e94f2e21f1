#include "heraldsim/fockspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "heraldsim/errors.hpp"

namespace heraldsim {

std::string_view to_string(ModeLabel label) {
  switch (label) {
    case ModeLabel::APlus: return "a+";
    case ModeLabel::AMinus: return "a-";
    case ModeLabel::BPlus: return "b+";
    case ModeLabel::BMinus: return "b-";
    case ModeLabel::A1: return "a1";
    case ModeLabel::A2: return "a2";
    case ModeLabel::B1: return "b1";
    case ModeLabel::B2: return "b2";
  }
  return "?";
}

ModeLayout::ModeLayout(std::vector<ModeSpec> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) throw std::invalid_argument("ModeLayout: no modes");
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i].cutoff < 2) {
      throw std::invalid_argument("ModeLayout: cutoff of mode " +
                                  std::string(to_string(modes_[i].label)) + " must be >= 2");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (modes_[j].label == modes_[i].label)
        throw std::invalid_argument("ModeLayout: duplicate mode label");
    }
  }
  strides_.assign(modes_.size(), 1);
  total_dim_ = 1;
  for (int i = static_cast<int>(modes_.size()) - 1; i >= 0; --i) {
    strides_[i] = total_dim_;
    total_dim_ *= modes_[i].cutoff;
  }
}

ModeLayout ModeLayout::canonical(int a_plus, int a_minus, int b_plus, int b_minus) {
  return ModeLayout({{ModeLabel::APlus, a_plus},
                     {ModeLabel::AMinus, a_minus},
                     {ModeLabel::BPlus, b_plus},
                     {ModeLabel::BMinus, b_minus}});
}

bool ModeLayout::contains(ModeLabel label) const {
  return std::any_of(modes_.begin(), modes_.end(),
                     [&](const ModeSpec& m) { return m.label == label; });
}

int ModeLayout::position(ModeLabel label) const {
  for (std::size_t i = 0; i < modes_.size(); ++i)
    if (modes_[i].label == label) return static_cast<int>(i);
  throw std::invalid_argument("ModeLayout: mode " + std::string(to_string(label)) +
                              " not in layout");
}

int ModeLayout::cutoff(ModeLabel label) const { return modes_[position(label)].cutoff; }

int ModeLayout::stride(ModeLabel label) const { return strides_[position(label)]; }

bool ModeLayout::is_canonical() const {
  static const ModeLabel order[4] = {ModeLabel::APlus, ModeLabel::AMinus, ModeLabel::BPlus,
                                     ModeLabel::BMinus};
  if (modes_.size() != 4) return false;
  for (int i = 0; i < 4; ++i)
    if (modes_[i].label != order[i]) return false;
  return true;
}

int ModeLayout::occupation(int index, ModeLabel label) const {
  const int p = position(label);
  return (index / strides_[p]) % modes_[p].cutoff;
}

std::vector<int> ModeLayout::digits(int index) const {
  std::vector<int> d(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) d[i] = (index / strides_[i]) % modes_[i].cutoff;
  return d;
}

int ModeLayout::index(std::span<const int> digits) const {
  if (digits.size() != modes_.size()) throw std::invalid_argument("ModeLayout::index: arity");
  int idx = 0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= modes_[i].cutoff)
      throw std::invalid_argument("ModeLayout::index: occupation outside cutoff");
    idx += digits[i] * strides_[i];
  }
  return idx;
}

ModeLayout ModeLayout::subset(std::span<const ModeLabel> keep) const {
  std::vector<ModeSpec> kept;
  for (const auto& m : modes_)
    if (std::find(keep.begin(), keep.end(), m.label) != keep.end()) kept.push_back(m);
  return ModeLayout(std::move(kept));
}

ModeLayout ModeLayout::relabeled(ModeLabel from, ModeLabel to) const {
  std::vector<ModeSpec> m = modes_;
  m[position(from)].label = to;
  return ModeLayout(std::move(m));
}

bool ModeLayout::operator==(const ModeLayout& other) const {
  if (modes_.size() != other.modes_.size()) return false;
  for (std::size_t i = 0; i < modes_.size(); ++i)
    if (modes_[i].label != other.modes_[i].label || modes_[i].cutoff != other.modes_[i].cutoff)
      return false;
  return true;
}

FockOperator::FockOperator(ModeLayout l, DenseMatrix m) : layout(std::move(l)), matrix(std::move(m)) {
  if (matrix.rows() != layout.total_dim() || matrix.cols() != layout.total_dim())
    throw std::invalid_argument("FockOperator: matrix shape does not match layout");
}

DensityMatrix::DensityMatrix(ModeLayout layout, DenseMatrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != layout_.total_dim() || matrix_.cols() != layout_.total_dim())
    throw std::invalid_argument("DensityMatrix: matrix shape does not match layout");
}

DensityMatrix DensityMatrix::from_pure(const ModeLayout& layout, const StateVector& psi) {
  if (psi.size() != layout.total_dim())
    throw std::invalid_argument("DensityMatrix::from_pure: state size mismatch");
  return DensityMatrix(layout, psi * psi.adjoint());
}

DensityMatrix DensityMatrix::basis_state(const ModeLayout& layout,
                                         std::span<const int> occupations) {
  DenseMatrix m = DenseMatrix::Zero(layout.total_dim(), layout.total_dim());
  const int i = layout.index(occupations);
  m(i, i) = 1.0;
  return DensityMatrix(layout, std::move(m));
}

double DensityMatrix::hermiticity_error() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  DenseMatrix h = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::expectation(const DenseMatrix& op) const {
  return (op.cwiseProduct(matrix_.transpose())).sum().real();
}

double DensityMatrix::occupation(ModeLabel label) const {
  double n = 0.0;
  for (int i = 0; i < dim(); ++i) n += layout_.occupation(i, label) * matrix_(i, i).real();
  return n;
}

void DensityMatrix::validate(double herm_tol, double trace_tol, double eig_tol) const {
  const double herm = hermiticity_error();
  if (herm > herm_tol) {
    std::ostringstream os;
    os << "density matrix not Hermitian: max deviation " << herm;
    throw InvalidState(os.str());
  }
  const double tr = std::abs(trace() - 1.0);
  if (tr > trace_tol) {
    std::ostringstream os;
    os << "density matrix trace deviates from 1 by " << tr;
    throw InvalidState(os.str());
  }
  const double ev = min_eigenvalue();
  if (ev < -eig_tol) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << ev;
    throw InvalidState(os.str());
  }
}

DenseMatrix destroy(int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("destroy: cutoff must be >= 2");
  DenseMatrix a = DenseMatrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

DenseMatrix number_op(int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("number_op: cutoff must be >= 2");
  DenseMatrix n = DenseMatrix::Zero(cutoff, cutoff);
  for (int k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

namespace {

void check_slot(const DenseMatrix& op, ModeLabel slot, const ModeLayout& layout) {
  const int c = layout.cutoff(slot);
  if (op.rows() != c || op.cols() != c)
    throw std::invalid_argument("embed: operator dimension does not match cutoff of " +
                                std::string(to_string(slot)));
}

}  // namespace

FockOperator embed(const DenseMatrix& op, ModeLabel slot, const ModeLayout& layout) {
  check_slot(op, slot, layout);
  const int dim = layout.total_dim();
  const int stride = layout.stride(slot);
  const int c = layout.cutoff(slot);
  DenseMatrix out = DenseMatrix::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    const int n = (col / stride) % c;
    const int base = col - n * stride;
    for (int m = 0; m < c; ++m) {
      if (op(m, n) != 0.0) out(base + m * stride, col) = op(m, n);
    }
  }
  return FockOperator(layout, std::move(out));
}

SparseMatrix embed_sparse(const DenseMatrix& op, ModeLabel slot, const ModeLayout& layout) {
  check_slot(op, slot, layout);
  const int dim = layout.total_dim();
  const int stride = layout.stride(slot);
  const int c = layout.cutoff(slot);
  std::vector<Eigen::Triplet<Complex>> trip;
  for (int col = 0; col < dim; ++col) {
    const int n = (col / stride) % c;
    const int base = col - n * stride;
    for (int m = 0; m < c; ++m)
      if (op(m, n) != 0.0) trip.emplace_back(base + m * stride, col, op(m, n));
  }
  SparseMatrix s(dim, dim);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

Displacement displacement(Complex amplitude, int cutoff, int pad) {
  if (cutoff < 2) throw std::invalid_argument("displacement: cutoff must be >= 2");
  if (pad < 0) throw std::invalid_argument("displacement: pad must be non-negative");
  const int big = cutoff + pad;
  const DenseMatrix a = destroy(big);
  const DenseMatrix gen = amplitude * a.adjoint() - std::conj(amplitude) * a;
  const DenseMatrix full = gen.exp();
  Displacement d;
  d.unitary = full.topLeftCorner(cutoff, cutoff);
  d.unitarity_deviation = std::abs(1.0 - d.unitary.col(0).squaredNorm());
  return d;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const ModeLabel> keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  const ModeLayout& layout = rho.layout();
  for (ModeLabel k : keep)
    if (!layout.contains(k))
      throw std::invalid_argument("partial_trace: mode " + std::string(to_string(k)) +
                                  " not in layout");
  ModeLayout reduced = layout.subset(keep);
  const int n = layout.num_modes();
  std::vector<bool> kept(n, false);
  for (int p = 0; p < n; ++p)
    kept[p] = std::find(keep.begin(), keep.end(), layout.modes()[p].label) != keep.end();

  const int dim = layout.total_dim();
  std::vector<int> red_index(dim), env_index(dim);
  for (int i = 0; i < dim; ++i) {
    const auto d = layout.digits(i);
    int r = 0, e = 0;
    for (int p = 0; p < n; ++p) {
      if (kept[p]) r = r * layout.modes()[p].cutoff + d[p];
      else e = e * layout.modes()[p].cutoff + d[p];
    }
    red_index[i] = r;
    env_index[i] = e;
  }
  DenseMatrix out = DenseMatrix::Zero(reduced.total_dim(), reduced.total_dim());
  const DenseMatrix& m = rho.matrix();
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i)
      if (env_index[i] == env_index[j]) out(red_index[i], red_index[j]) += m(i, j);
  return DensityMatrix(std::move(reduced), std::move(out));
}

DenseMatrix partial_transpose(const DenseMatrix& matrix, const ModeLayout& layout,
                              ModeLabel subsystem) {
  if (!layout.contains(subsystem))
    throw std::invalid_argument("partial_transpose: mode " + std::string(to_string(subsystem)) +
                                " not in layout");
  if (matrix.rows() != layout.total_dim() || matrix.cols() != layout.total_dim())
    throw std::invalid_argument("partial_transpose: shape mismatch");
  const int dim = layout.total_dim();
  const int stride = layout.stride(subsystem);
  const int c = layout.cutoff(subsystem);
  DenseMatrix out(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const int nj = (j / stride) % c;
    for (int i = 0; i < dim; ++i) {
      const int ni = (i / stride) % c;
      const int i2 = i + (nj - ni) * stride;
      const int j2 = j + (ni - nj) * stride;
      out(i2, j2) = matrix(i, j);
    }
  }
  return out;
}

std::pair<DensityMatrix, double> project_and_normalize(const DensityMatrix& rho,
                                                        const FockOperator& projector) {
  if (!(projector.layout == rho.layout()))
    throw std::invalid_argument("project_and_normalize: layout mismatch");
  const DenseMatrix& p = projector.matrix;
  const double idem = (p * p - p).cwiseAbs().maxCoeff();
  if (idem > 1e-10) throw std::invalid_argument("project_and_normalize: projector not idempotent");
  const double prob = (p * rho.matrix()).trace().real();
  if (!(prob >= 1e-12)) {
    std::ostringstream os;
    os << "herald probability " << prob << " below 1e-12";
    throw ZeroProbabilityHerald(os.str());
  }
  DenseMatrix out = p * rho.matrix() * p.adjoint() / prob;
  return {DensityMatrix(rho.layout(), std::move(out)), std::min(prob, 1.0)};
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<ModeSpec> modes = a.layout().modes();
  for (const auto& m : b.layout().modes()) modes.push_back(m);
  ModeLayout layout(std::move(modes));
  const int da = a.dim(), db = b.dim();
  DenseMatrix out(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  return DensityMatrix(std::move(layout), std::move(out));
}

FockOperator number_projector(const ModeLayout& layout, ModeLabel slot, int n) {
  const int c = layout.cutoff(slot);
  if (n < 0 || n >= c) throw std::invalid_argument("number_projector: level outside cutoff");
  DenseMatrix single = DenseMatrix::Zero(c, c);
  single(n, n) = 1.0;
  return embed(single, slot, layout);
}

}  // namespace heraldsim
