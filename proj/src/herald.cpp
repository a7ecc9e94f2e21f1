#include "heraldsim/herald.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "json.hpp"

#include "heraldsim/errors.hpp"

namespace heraldsim {

namespace {

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

DenseMatrix full_beam_splitter(int big) {
  const DenseMatrix d = destroy(big);
  const DenseMatrix id = DenseMatrix::Identity(big, big);
  const DenseMatrix a = kron(d, id);
  const DenseMatrix b = kron(id, d);
  const DenseMatrix gen = (std::numbers::pi / 4.0) * (b.adjoint() * a - a.adjoint() * b);
  DenseMatrix u = gen.exp();
  // Right-multiply by the parity (-1)^{n_B}.
  for (int col = 0; col < big * big; ++col)
    if ((col % big) % 2 == 1) u.col(col) *= -1.0;
  return u;
}

struct SplitterCache {
  std::mutex mu;
  std::map<int, DenseMatrix> enlarged;
  std::map<int, DenseMatrix> restricted;
};

SplitterCache& cache() {
  static SplitterCache c;
  return c;
}

const DenseMatrix& enlarged_splitter(int cutoff) {
  SplitterCache& c = cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto it = c.enlarged.find(cutoff);
  if (it == c.enlarged.end()) it = c.enlarged.emplace(cutoff, full_beam_splitter(2 * cutoff - 1)).first;
  return it->second;
}

// Applies W to the adjacent pair (first, first + 1) of the layout and relabels.
// With enlarge, both cutoffs grow to 2c - 1, which holds every image of the
// input exactly since W conserves the pair's total excitation number.
DensityMatrix rotate_pair(const DensityMatrix& rho, ModeLabel from_a, ModeLabel from_b,
                          ModeLabel to_a, ModeLabel to_b, bool enlarge) {
  const ModeLayout& l = rho.layout();
  if (!l.contains(from_a) || !l.contains(from_b))
    throw std::invalid_argument("basis rotation: modes " + std::string(to_string(from_a)) + ", " +
                                std::string(to_string(from_b)) + " not in layout");
  const int pa = l.position(from_a), pb = l.position(from_b);
  if (pb != pa + 1) throw std::invalid_argument("basis rotation: modes must be adjacent");
  const int c = l.cutoff(from_a);
  if (l.cutoff(from_b) != c) throw std::invalid_argument("basis rotation: unequal cutoffs");

  const int cn = enlarge ? 2 * c - 1 : c;
  std::vector<ModeSpec> specs = l.modes();
  specs[pa] = {to_a, cn};
  specs[pb] = {to_b, cn};
  ModeLayout out_layout(specs);

  int left = 1, right = 1;
  for (int k = 0; k < pa; ++k) left *= specs[k].cutoff;
  for (int k = pb + 1; k < static_cast<int>(specs.size()); ++k) right *= specs[k].cutoff;

  const DenseMatrix& w = beam_splitter(cn);
  // Embed rho into the output index space.
  DenseMatrix x = rho.matrix();
  if (enlarge) {
    std::vector<int> map(l.total_dim());
    for (int i = 0; i < l.total_dim(); ++i) map[i] = out_layout.index(l.digits(i));
    DenseMatrix e = DenseMatrix::Zero(out_layout.total_dim(), out_layout.total_dim());
    for (int j = 0; j < l.total_dim(); ++j)
      for (int i = 0; i < l.total_dim(); ++i) e(map[i], map[j]) = x(i, j);
    x = std::move(e);
  }
  const DenseMatrix u =
      kron(kron(DenseMatrix::Identity(left, left), w), DenseMatrix::Identity(right, right));
  DenseMatrix y = u * x * u.adjoint();
  return DensityMatrix(out_layout, std::move(y));
}

// Keeps the entries of rho that exist in the smaller layout (same labels).
DensityMatrix truncate_to(const DensityMatrix& rho, const ModeLayout& target) {
  const ModeLayout& l = rho.layout();
  std::vector<int> keep;
  for (int i = 0; i < l.total_dim(); ++i) {
    const std::vector<int> dg = l.digits(i);
    bool ok = true;
    for (int k = 0; k < l.num_modes() && ok; ++k) ok = dg[k] < target.modes()[k].cutoff;
    if (ok) keep.push_back(i);
  }
  DenseMatrix out(target.total_dim(), target.total_dim());
  for (std::size_t b = 0; b < keep.size(); ++b)
    for (std::size_t a = 0; a < keep.size(); ++a) out(a, b) = rho.matrix()(keep[a], keep[b]);
  return DensityMatrix(target, std::move(out));
}

std::pair<ModeLabel, ModeLabel> optical_pair(BasisDirection d, bool source) {
  const bool normal = (d == BasisDirection::NormalToLocal) == source;
  return normal ? std::pair{ModeLabel::APlus, ModeLabel::AMinus}
                : std::pair{ModeLabel::A1, ModeLabel::A2};
}

std::pair<ModeLabel, ModeLabel> mechanical_pair(BasisDirection d, bool source) {
  const bool normal = (d == BasisDirection::NormalToLocal) == source;
  return normal ? std::pair{ModeLabel::BPlus, ModeLabel::BMinus}
                : std::pair{ModeLabel::B1, ModeLabel::B2};
}

}  // namespace

const DenseMatrix& beam_splitter(int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("beam_splitter: cutoff must be >= 2");
  const DenseMatrix& big = enlarged_splitter(cutoff);
  SplitterCache& c = cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto it = c.restricted.find(cutoff);
  if (it == c.restricted.end()) {
    const int n = 2 * cutoff - 1;
    DenseMatrix r(cutoff * cutoff, cutoff * cutoff);
    for (int i = 0; i < cutoff * cutoff; ++i)
      for (int j = 0; j < cutoff * cutoff; ++j)
        r(i, j) = big((i / cutoff) * n + i % cutoff, (j / cutoff) * n + j % cutoff);
    it = c.restricted.emplace(cutoff, std::move(r)).first;
  }
  return it->second;
}

DensityMatrix optical_basis_rotation(const DensityMatrix& rho, BasisDirection direction) {
  const auto [fa, fb] = optical_pair(direction, true);
  const auto [ta, tb] = optical_pair(direction, false);
  return rotate_pair(rho, fa, fb, ta, tb, false);
}

DensityMatrix mechanical_basis_rotation(const DensityMatrix& rho, BasisDirection direction) {
  const auto [fa, fb] = mechanical_pair(direction, true);
  const auto [ta, tb] = mechanical_pair(direction, false);
  return rotate_pair(rho, fa, fb, ta, tb, false);
}

ReconstructedState reconstruct_full(const DensityMatrix& rho_fluct, const ClassicalAmplitudes& c,
                                    int pad) {
  const ModeLayout& l = rho_fluct.layout();
  if (!l.is_canonical()) throw std::invalid_argument("reconstruct_full: canonical layout required");
  const Complex amp[4] = {c.alpha_plus, c.alpha_minus, c.beta_plus, c.beta_minus};
  DenseMatrix d = DenseMatrix::Identity(1, 1);
  double dev = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Displacement dk = displacement(amp[k], l.modes()[k].cutoff, pad);
    dev = std::max(dev, dk.unitarity_deviation);
    d = kron(d, dk.unitary);
  }
  if (dev > 1e-4) {
    std::ostringstream os;
    os << "reconstruct_full: displacement unitarity deviation " << dev
       << " exceeds 1e-4; classical amplitudes too large for the cutoffs";
    throw CutoffTooSmall(os.str());
  }
  DenseMatrix y = d * rho_fluct.matrix() * d.adjoint();
  dev = std::max(dev, std::abs(rho_fluct.matrix().trace() - y.trace()));
  if (dev > 1e-4) {
    std::ostringstream os;
    os << "reconstruct_full: displaced state loses weight " << dev
       << " beyond the cutoffs";
    throw CutoffTooSmall(os.str());
  }
  return {DensityMatrix(l, std::move(y)), dev};
}

ReconstructedState reconstruct_full(const DensityMatrix& rho_fluct,
                                    const ClassicalTrajectory& classical, double t, int pad) {
  const long idx = classical.grid_index(t);
  const ClassicalAmplitudes c =
      idx >= 0 ? classical.at(static_cast<std::size_t>(idx)) : classical.interpolate(t);
  return reconstruct_full(rho_fluct, c, pad);
}

std::pair<double, double> optical_photon_weights(const DensityMatrix& rho) {
  const ModeLayout& l = rho.layout();
  if (!l.is_canonical()) throw std::invalid_argument("optical_photon_weights: canonical layout required");
  double p1 = 0.0, pm = 0.0;
  for (int i = 0; i < l.total_dim(); ++i) {
    const int n = l.occupation(i, ModeLabel::APlus) + l.occupation(i, ModeLabel::AMinus);
    const double p = rho.matrix()(i, i).real();
    if (n == 1) p1 += p;
    else if (n >= 2) pm += p;
  }
  return {p1, pm};
}

DensityMatrix project_in_normal_basis(const DensityMatrix& rho, int cavity, double* probability,
                                      double* lost_weight) {
  if (cavity != 1 && cavity != 2) throw std::invalid_argument("project_in_normal_basis: cavity must be 1 or 2");
  const ModeLayout& l = rho.layout();
  if (!l.is_canonical()) throw std::invalid_argument("project_in_normal_basis: canonical layout required");
  const DensityMatrix local =
      rotate_pair(rho, ModeLabel::APlus, ModeLabel::AMinus, ModeLabel::A1, ModeLabel::A2, true);
  const FockOperator proj =
      number_projector(local.layout(), cavity == 1 ? ModeLabel::A1 : ModeLabel::A2, 1);
  auto [projected, prob] = project_and_normalize(local, proj);
  const DensityMatrix back = rotate_pair(projected, ModeLabel::A1, ModeLabel::A2, ModeLabel::APlus,
                                         ModeLabel::AMinus, false);
  DensityMatrix out = truncate_to(back, l);
  const double kept = out.trace().real();
  if (probability) *probability = prob;
  if (lost_weight) *lost_weight = 1.0 - kept;
  out.matrix() /= kept;
  return out;
}

DensityMatrix dephase_local_mechanics(const DensityMatrix& rho, double* lost_weight) {
  const ModeLayout& l = rho.layout();
  if (!l.is_canonical()) throw std::invalid_argument("dephase_local_mechanics: canonical layout required");
  DensityMatrix local =
      rotate_pair(rho, ModeLabel::BPlus, ModeLabel::BMinus, ModeLabel::B1, ModeLabel::B2, true);
  const ModeLayout& ll = local.layout();
  const int s1 = ll.stride(ModeLabel::B1);
  const int block = s1 * ll.cutoff(ModeLabel::B1);
  for (int j = 0; j < ll.total_dim(); ++j)
    for (int i = 0; i < ll.total_dim(); ++i)
      if (i % block != j % block) local.matrix()(i, j) = 0.0;
  const DensityMatrix back = rotate_pair(local, ModeLabel::B1, ModeLabel::B2, ModeLabel::BPlus,
                                         ModeLabel::BMinus, false);
  DensityMatrix out = truncate_to(back, l);
  const double kept = out.trace().real();
  if (lost_weight) *lost_weight = rho.trace().real() - kept;
  out.matrix() *= rho.trace().real() / kept;
  return out;
}

QubitMatrix qubit_block(const DensityMatrix& rho_mech, double* weight) {
  const ModeLayout& l = rho_mech.layout();
  if (l.num_modes() != 2 || !l.contains(ModeLabel::B1) || !l.contains(ModeLabel::B2))
    throw std::invalid_argument("qubit_block: expected a (b1, b2) layout");
  const int s1 = l.stride(ModeLabel::B1), s2 = l.stride(ModeLabel::B2);
  const int idx[4] = {0, s2, s1, s1 + s2};
  QubitMatrix q;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) q(i, j) = rho_mech.matrix()(idx[i], idx[j]);
  const double w = q.trace().real();
  if (weight) *weight = w;
  return q;
}

HeraldedState herald_single_photon(const DensityMatrix& rho_full, int cavity) {
  if (cavity != 1 && cavity != 2) throw std::invalid_argument("herald_single_photon: cavity must be 1 or 2");
  const ModeLayout& l = rho_full.layout();
  if (!l.is_canonical()) throw std::invalid_argument("herald_single_photon: canonical layout required");
  HeraldedState h;
  h.cavity = cavity;
  const auto [p1, pm] = optical_photon_weights(rho_full);
  h.single_photon_weight = p1;
  h.multi_photon_weight = pm;
  h.two_photon_contamination = p1 > 0.0 ? pm / p1 : 0.0;

  const DensityMatrix local =
      rotate_pair(rho_full, ModeLabel::APlus, ModeLabel::AMinus, ModeLabel::A1, ModeLabel::A2, true);
  const FockOperator proj =
      number_projector(local.layout(), cavity == 1 ? ModeLabel::A1 : ModeLabel::A2, 1);
  auto [projected, prob] = project_and_normalize(local, proj);
  h.herald_probability = prob;

  const ModeLabel keep[2] = {ModeLabel::BPlus, ModeLabel::BMinus};
  const DensityMatrix mech_normal = partial_trace(projected, keep);
  h.rho_mech = rotate_pair(mech_normal, ModeLabel::BPlus, ModeLabel::BMinus, ModeLabel::B1,
                           ModeLabel::B2, true);
  h.rho_full = std::move(projected);
  const QubitMatrix q = qubit_block(h.rho_mech, &h.qubit_weight);
  if (!(h.qubit_weight > 1e-300)) throw ZeroProbabilityHerald("herald: empty phonon qubit block");
  h.rho_qubit = q / h.qubit_weight;
  return h;
}

HeraldedState herald_at(const DensityMatrix& rho_fluct, const ClassicalTrajectory& classical,
                        double t, int cavity, HeraldFrame frame) {
  HeraldedState h;
  if (frame == HeraldFrame::Full) {
    ReconstructedState r = reconstruct_full(rho_fluct, classical, t);
    h = herald_single_photon(r.rho, cavity);
    h.unitarity_deviation = r.unitarity_deviation;
  } else {
    h = herald_single_photon(rho_fluct, cavity);
  }
  h.herald_time = t;
  return h;
}

void write_qubit_json(std::ostream& os, const HeraldedState& h) {
  nlohmann::ordered_json j;
  j["basis"] = {"|00>", "|01>", "|10>", "|11>"};
  j["modes"] = {"b1", "b2"};
  j["layout"] = "row-major 4x4, each entry [re, im]";
  j["retained_weight"] = h.qubit_weight;
  j["herald_time_ns"] = h.herald_time;
  j["cavity"] = h.cavity;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int r = 0; r < 4; ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int c = 0; c < 4; ++c) row.push_back({h.rho_qubit(r, c).real(), h.rho_qubit(r, c).imag()});
    rows.push_back(row);
  }
  j["rho"] = rows;
  os << j.dump(2) << '\n';
}

}  // namespace heraldsim
