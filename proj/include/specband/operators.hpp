#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>

#include "specband/common.hpp"
#include "specband/geometry.hpp"

namespace specband {

/// Sparse matrix acting on nodal values of a grid function. Inner products
/// are the grid-weighted ones; the grid weight is uniform, so hermiticity in
/// the weighted sense is ordinary matrix hermiticity.
class SparseOperator {
 public:
  SparseOperator() = default;
  explicit SparseOperator(SpMat m, bool hermitian = true);
  static SparseOperator zero(int dim);

  Eigen::Index dim() const { return mat_.rows(); }
  const SpMat& matrix() const { return mat_; }
  bool hermitian() const { return hermitian_; }

  /// True when no entry carries an imaginary part.
  bool is_real() const;
  RSpMat real_matrix() const;

  /// Exact entrywise closure under conjugate transposition.
  bool is_exactly_hermitian() const;
  double hermiticity_defect() const;

  Vec apply(const Vec& x) const { return mat_ * x; }
  /// Gershgorin bound on the spectral radius.
  double norm_estimate() const;

  SparseOperator operator+(const SparseOperator& o) const;
  SparseOperator operator-(const SparseOperator& o) const;
  SparseOperator scaled(double s) const;

  /// "row col re im" per line, 0-based.
  void write_triplets(std::ostream& os) const;
  static SparseOperator read_triplets(std::istream& is, int dim);

 private:
  SpMat mat_;
  bool hermitian_ = true;
};

/// Single-site perturbation L(t) = t L1 + t^2 L2 + t^3 L3(t) as cell-local
/// matrices on the unit-cell grid.
struct PerturbationFamily {
  std::string name;
  std::string origin;
  SpMat l1;
  SpMat l2;
  std::function<SpMat(double)> l3;  // empty means L3 = 0
  double l3_bound = 0;              // declared bound on ||L3(t)|| over [-t0, t0]
  double t0 = 1.0;
  /// Diagonal samples of L1/L2 for multiplication families (empty otherwise).
  RVec v1;
  RVec v2;

  int dim() const { return static_cast<int>(l1.rows()); }
  bool is_real() const;
  bool l1_is_diagonal() const;
  /// Hermiticity of L1, L2 and L3(t) at five sampled t plus the declared
  /// bound on L3. Throws DomainError on violation.
  void validate() const;
};

/// Transverse ground data on the 1-D interval.
struct TransverseGround {
  double lambda0 = 0;
  double lambda1 = std::numeric_limits<double>::infinity();
  RVec psi0;  // normalized in the h-weighted norm, positive
  RVec eigenvalues;
};

/// Discrete ground data of the one-cell operator H_cell.
struct CellSpectrum {
  double lambda0 = 0;
  Vec psi0;  // longitudinally constant, positive, weighted-normalized
  double lambda1 = 0;
  bool discrete = true;
  double weight = 0;  // quadrature weight of the cell grid
};

/// Samples of V0 on the transverse grid (empty span means V0 = 0).
SparseOperator assemble_unperturbed(const Grid& grid, std::span<const double> v0);

TransverseGround transverse_ground(std::span<const double> v0, double d, const BoundaryCondition& bc,
                                   int m_trans);

SparseOperator cell_operator(const Grid& cell_grid, std::span<const double> v0);

/// Ground data of the cell operator from its tensor structure.
CellSpectrum cell_spectrum(const Grid& cell_grid, std::span<const double> v0);

SparseOperator embed_cell(const Grid& grid, int k, const SparseOperator& l_cell);
SparseOperator restrict_cell(const Grid& grid, int k, const SparseOperator& global);

SparseOperator family_at(const PerturbationFamily& family, double t);

/// H0 + sum_k S(k) L(eps * omega_k) S(-k).
SparseOperator assemble_randomized(const Grid& grid, const SparseOperator& h0,
                                   const PerturbationFamily& family, double epsilon,
                                   std::span<const double> omega);
SparseOperator assemble_randomized(const Grid& grid, std::span<const double> v0,
                                   const PerturbationFamily& family, double epsilon,
                                   std::span<const double> omega);

/// Weighted inner product (a, b) = w * sum a_i conj(b_i).
cplx inner(const Vec& a, const Vec& b, double weight);
double wnorm(const Vec& a, double weight);

/// Sample V0 on the transverse grid of `grid`.
RVec sample_transverse(const Grid& grid, const std::function<double(double)>& f);

}  // namespace specband
