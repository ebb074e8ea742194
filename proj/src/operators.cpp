#include "specband/operators.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <vector>

#include "specband/stencil.hpp"

namespace specband {

SparseOperator::SparseOperator(SpMat m, bool hermitian) : mat_(std::move(m)), hermitian_(hermitian) {
  mat_.makeCompressed();
}

SparseOperator SparseOperator::zero(int dim) { return SparseOperator(SpMat(dim, dim)); }

bool SparseOperator::is_real() const {
  for (Eigen::Index k = 0; k < mat_.outerSize(); ++k)
    for (SpMat::InnerIterator it(mat_, k); it; ++it)
      if (it.value().imag() != 0.0) return false;
  return true;
}

RSpMat SparseOperator::real_matrix() const { return mat_.real(); }

double SparseOperator::hermiticity_defect() const {
  SpMat diff = SpMat(mat_.adjoint()) - mat_;
  double worst = 0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

bool SparseOperator::is_exactly_hermitian() const { return hermiticity_defect() == 0.0; }

double SparseOperator::norm_estimate() const {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(mat_.rows());
  for (Eigen::Index k = 0; k < mat_.outerSize(); ++k)
    for (SpMat::InnerIterator it(mat_, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

SparseOperator SparseOperator::operator+(const SparseOperator& o) const {
  return SparseOperator(SpMat(mat_ + o.mat_), hermitian_ && o.hermitian_);
}

SparseOperator SparseOperator::operator-(const SparseOperator& o) const {
  return SparseOperator(SpMat(mat_ - o.mat_), hermitian_ && o.hermitian_);
}

SparseOperator SparseOperator::scaled(double s) const { return SparseOperator(SpMat(mat_ * cplx(s)), hermitian_); }

void SparseOperator::write_triplets(std::ostream& os) const {
  std::vector<Eigen::Triplet<cplx>> t;
  for (Eigen::Index k = 0; k < mat_.outerSize(); ++k)
    for (SpMat::InnerIterator it(mat_, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
    return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
  });
  os << std::setprecision(17);
  for (const auto& e : t) os << e.row() << ' ' << e.col() << ' ' << e.value().real() << ' ' << e.value().imag() << '\n';
}

SparseOperator SparseOperator::read_triplets(std::istream& is, int dim) {
  std::vector<Eigen::Triplet<cplx>> t;
  long r, c;
  double re, im;
  while (is >> r >> c >> re >> im) {
    if (r < 0 || c < 0 || r >= dim || c >= dim) throw DomainError("triplet index outside the operator");
    t.emplace_back(r, c, cplx(re, im));
  }
  SpMat m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  SparseOperator op(std::move(m));
  op.hermitian_ = op.is_exactly_hermitian();
  return op;
}

bool PerturbationFamily::is_real() const {
  auto real = [](const SpMat& m) { return SparseOperator(m, false).is_real(); };
  return real(l1) && real(l2) && !l3;
}

bool PerturbationFamily::l1_is_diagonal() const {
  for (Eigen::Index k = 0; k < l1.outerSize(); ++k)
    for (SpMat::InnerIterator it(l1, k); it; ++it)
      if (it.row() != it.col() && it.value() != cplx(0)) return false;
  return true;
}

void PerturbationFamily::validate() const {
  if (l1.rows() != l1.cols() || l2.rows() != l1.rows() || l2.cols() != l1.cols())
    throw DomainError("family '" + name + "': L1/L2 shape mismatch");
  if (!SparseOperator(l1).is_exactly_hermitian()) throw DomainError("family '" + name + "': L1 not hermitian");
  if (!SparseOperator(l2).is_exactly_hermitian()) throw DomainError("family '" + name + "': L2 not hermitian");
  if (!(t0 > 0)) throw DomainError("family '" + name + "': t0 must be positive");
  if (l3) {
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const SparseOperator m(l3(s * t0));
      if (m.dim() != dim()) throw DomainError("family '" + name + "': L3 shape mismatch");
      if (m.hermiticity_defect() > 1e-14 * std::max(1.0, m.norm_estimate()))
        throw DomainError("family '" + name + "': L3(t) not hermitian");
      if (m.norm_estimate() > l3_bound * (1 + 1e-12))
        throw DomainError("family '" + name + "': L3(t) exceeds its declared bound");
    }
  }
}

SparseOperator assemble_unperturbed(const Grid& grid, std::span<const double> v0) {
  using namespace stencil;
  const int m = grid.m_trans();
  if (!v0.empty() && static_cast<int>(v0.size()) != m)
    throw DomainError("V0 samples do not match the transverse grid");
  const int L = grid.points_per_side();
  RSpMat lap1 = neumann_laplacian_1d(L, grid.h_long());
  RSpMat h(grid.dim(), grid.dim());
  for (int a = 0; a < grid.n(); ++a) h += tensor(along_axis(lap1, a, grid.n(), L), identity(m));
  RSpMat t = transverse_laplacian(m, grid.h_trans(), grid.bc());
  if (!v0.empty()) t += diag(Eigen::Map<const RVec>(v0.data(), m));
  h += tensor(identity(grid.long_points()), t);
  h.makeCompressed();
  return SparseOperator(to_complex(h));
}

TransverseGround transverse_ground(std::span<const double> v0, double d, const BoundaryCondition& bc,
                                   int m_trans) {
  if (m_trans < 1) throw DomainError("m_trans must be >= 1");
  const bool any_dirichlet = bc.transverse_low == Face::Dirichlet || bc.transverse_high == Face::Dirichlet;
  if (m_trans == 1 && any_dirichlet) throw DomainError("whole-space mode has no transverse boundary");
  if (any_dirichlet && m_trans < 3) throw DomainError("Dirichlet transverse problem needs m_trans >= 3");
  if (!any_dirichlet && m_trans < 2 && m_trans != 1) throw DomainError("Neumann transverse problem needs m_trans >= 2");
  if (!v0.empty() && static_cast<int>(v0.size()) != m_trans)
    throw DomainError("V0 samples do not match the transverse grid");

  const double h = d / m_trans;
  Eigen::MatrixXd t = stencil::transverse_laplacian(m_trans, h, bc);
  if (!v0.empty()) t.diagonal() += Eigen::Map<const RVec>(v0.data(), m_trans);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);

  TransverseGround out;
  out.eigenvalues = es.eigenvalues();
  out.lambda0 = es.eigenvalues()[0];
  if (m_trans > 1) {
    out.lambda1 = es.eigenvalues()[1];
    const double scale = std::max(1.0, std::abs(out.lambda0));
    if (out.lambda1 - out.lambda0 < 1e-10 * scale) throw DomainError("degenerate transverse ground state");
  }
  RVec psi = es.eigenvectors().col(0);
  if (psi.sum() < 0) psi = -psi;
  psi /= std::sqrt(psi.squaredNorm() * h);
  out.psi0 = psi;
  return out;
}

SparseOperator cell_operator(const Grid& cell_grid, std::span<const double> v0) {
  if (cell_grid.cell_count() != 1) throw DomainError("cell_operator expects a one-cell grid");
  return assemble_unperturbed(cell_grid, v0);
}

CellSpectrum cell_spectrum(const Grid& cell_grid, std::span<const double> v0) {
  if (cell_grid.cell_count() != 1) throw DomainError("cell_spectrum expects a one-cell grid");
  const auto& s = cell_grid.spec();
  const auto tg = transverse_ground(v0, s.d, cell_grid.bc(), s.m_trans);
  const int p = s.p_long;
  // first nonzero eigenvalue of the cell-centered Neumann Laplacian, h = 1/p
  const double sn = std::sin(kPi / (2.0 * p));
  const double mu1 = 4.0 * p * p * sn * sn;

  CellSpectrum cs;
  cs.lambda0 = tg.lambda0;
  cs.lambda1 = std::min(tg.lambda1, tg.lambda0 + mu1);
  cs.weight = cell_grid.weight();
  const int long_pts = cell_grid.long_points();
  cs.psi0.resize(cell_grid.dim());
  for (int l = 0; l < long_pts; ++l)
    for (int j = 0; j < s.m_trans; ++j) cs.psi0[l * s.m_trans + j] = tg.psi0[j];
  if (cs.lambda1 - cs.lambda0 < 1e-10 * std::max(1.0, std::abs(cs.lambda0)))
    throw DomainError("degenerate cell ground state");
  return cs;
}

SparseOperator embed_cell(const Grid& grid, int k, const SparseOperator& l_cell) {
  const auto pts = grid.cell_points(k);
  if (l_cell.dim() != static_cast<Eigen::Index>(pts.size()))
    throw DomainError("cell operator dimension does not match the cell point count");
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(l_cell.matrix().nonZeros());
  const SpMat& m = l_cell.matrix();
  for (Eigen::Index c = 0; c < m.outerSize(); ++c)
    for (SpMat::InnerIterator it(m, c); it; ++it) t.emplace_back(pts[it.row()], pts[it.col()], it.value());
  SpMat out(grid.dim(), grid.dim());
  out.setFromTriplets(t.begin(), t.end());
  return SparseOperator(std::move(out), l_cell.hermitian());
}

SparseOperator restrict_cell(const Grid& grid, int k, const SparseOperator& global) {
  const auto pts = grid.cell_points(k);
  std::vector<int> local(grid.dim(), -1);
  for (size_t i = 0; i < pts.size(); ++i) local[pts[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<cplx>> t;
  const SpMat& m = global.matrix();
  for (Eigen::Index c = 0; c < m.outerSize(); ++c)
    for (SpMat::InnerIterator it(m, c); it; ++it)
      if (local[it.row()] >= 0 && local[it.col()] >= 0) t.emplace_back(local[it.row()], local[it.col()], it.value());
  SpMat out(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(pts.size()));
  out.setFromTriplets(t.begin(), t.end());
  return SparseOperator(std::move(out), global.hermitian());
}

SparseOperator family_at(const PerturbationFamily& family, double t) {
  if (std::abs(t) > family.t0 * (1 + 1e-12))
    throw DomainError("coupling " + std::to_string(t) + " outside the family range of '" + family.name + "'");
  SpMat m = family.l1 * cplx(t) + family.l2 * cplx(t * t);
  if (family.l3) m += family.l3(t) * cplx(t * t * t);
  m.prune(cplx(0));
  return SparseOperator(std::move(m));
}

SparseOperator assemble_randomized(const Grid& grid, const SparseOperator& h0, const PerturbationFamily& family,
                                   double epsilon, std::span<const double> omega) {
  if (static_cast<int>(omega.size()) != grid.cell_count())
    throw DomainError("coupling vector length does not match the cell count");
  if (family.dim() != grid.points_per_cell()) throw DomainError("family built for a different cell grid");
  std::vector<Eigen::Triplet<cplx>> t;
  const SpMat& base = h0.matrix();
  t.reserve(base.nonZeros() + static_cast<size_t>(grid.cell_count()) * (family.l1.nonZeros() + family.l2.nonZeros()));
  for (Eigen::Index c = 0; c < base.outerSize(); ++c)
    for (SpMat::InnerIterator it(base, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < grid.cell_count(); ++k) {
    const double tk = epsilon * omega[k];
    if (tk == 0.0) continue;
    const auto pts = grid.cell_points(k);
    const SparseOperator lk = family_at(family, tk);
    const SpMat& m = lk.matrix();
    for (Eigen::Index c = 0; c < m.outerSize(); ++c)
      for (SpMat::InnerIterator it(m, c); it; ++it) t.emplace_back(pts[it.row()], pts[it.col()], it.value());
  }
  SpMat out(grid.dim(), grid.dim());
  out.setFromTriplets(t.begin(), t.end());
  return SparseOperator(std::move(out));
}

SparseOperator assemble_randomized(const Grid& grid, std::span<const double> v0, const PerturbationFamily& family,
                                   double epsilon, std::span<const double> omega) {
  return assemble_randomized(grid, assemble_unperturbed(grid, v0), family, epsilon, omega);
}

cplx inner(const Vec& a, const Vec& b, double weight) { return weight * b.dot(a); }

double wnorm(const Vec& a, double weight) { return std::sqrt(weight * a.squaredNorm()); }

RVec sample_transverse(const Grid& grid, const std::function<double(double)>& f) {
  RVec v(grid.m_trans());
  for (int j = 0; j < grid.m_trans(); ++j) v[j] = f(grid.trans_coord(j));
  return v;
}

}  // namespace specband
