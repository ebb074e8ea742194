#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "specband/common.hpp"
#include "specband/operators.hpp"

namespace specband::linalg {

using Apply = std::function<Vec(const Vec&)>;

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0;
  bool converged = false;
};

/// Preconditioned conjugate gradients for a hermitian positive definite
/// operator. `precond` applies an approximation of A^{-1}; `project`, when
/// set, is applied to every iterate so the solve stays in a subspace (the
/// operator must map that subspace into itself).
SolveStats pcg(const Apply& a, const Apply& precond, const Vec& b, Vec& x, double tol, int max_iter,
               const Apply& project = {});

/// Incomplete-Cholesky preconditioner of a hermitian positive definite
/// sparse matrix (diagonal fallback if the factorization breaks down).
class IcPreconditioner {
 public:
  explicit IcPreconditioner(const SpMat& a);
  Vec operator()(const Vec& r) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Exact sparse LDL^T solve, used where a preconditioner is a small matrix
/// we can afford to factor.
class LdltSolver {
 public:
  explicit LdltSolver(const SpMat& a);
  Vec operator()(const Vec& r) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct RitzPairs {
  RVec values;              // ascending
  Eigen::MatrixXcd vectors; // columns, Euclidean-normalized
  RVec residuals;           // ||A v - theta v||
};

/// Lanczos with full reorthogonalization; returns all Ritz pairs of the
/// Krylov space of dimension min(steps, dim).
RitzPairs lanczos(const Apply& a, int dim, int steps, std::uint64_t seed);

/// Deterministic pseudo-random unit start vector.
Vec random_unit_vector(int dim, std::uint64_t seed);

Eigen::MatrixXcd dense(const SpMat& m);

}  // namespace specband::linalg
