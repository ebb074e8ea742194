#include "specband/linalg.hpp"

#include <cmath>

#include "specband/random.hpp"

namespace specband::linalg {

SolveStats pcg(const Apply& a, const Apply& precond, const Vec& b, Vec& x, double tol, int max_iter,
               const Apply& project) {
  auto proj = [&](Vec v) { return project ? project(v) : v; };
  SolveStats st;
  const double bnorm = b.norm();
  if (x.size() != b.size()) x = Vec::Zero(b.size());
  if (bnorm == 0.0) {
    x.setZero();
    st.converged = true;
    return st;
  }
  x = proj(x);
  Vec r = proj(b - a(x));
  Vec z = proj(precond(r));
  Vec p = z;
  cplx rz = r.dot(z);
  st.relative_residual = r.norm() / bnorm;
  while (st.relative_residual > tol && st.iterations < max_iter) {
    const Vec ap = proj(a(p));
    const cplx pap = p.dot(ap);
    // loss of positivity: the operator is not definite on this subspace
    if (!(pap.real() > 0.0)) break;
    const cplx alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    ++st.iterations;
    // refresh the true residual now and then to limit drift
    if (st.iterations % 50 == 0) r = proj(b - a(x));
    st.relative_residual = r.norm() / bnorm;
    z = proj(precond(r));
    const cplx rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  st.relative_residual = proj(b - a(x)).norm() / bnorm;
  st.converged = st.relative_residual <= tol * 10;
  return st;
}

struct IcPreconditioner::Impl {
  Eigen::IncompleteCholesky<cplx, Eigen::Lower, Eigen::AMDOrdering<int>> ic;
  RVec inv_diag;
  bool ok = false;
};

IcPreconditioner::IcPreconditioner(const SpMat& a) {
  auto impl = std::make_shared<Impl>();
  impl->ic.compute(a);
  impl->ok = impl->ic.info() == Eigen::Success;
  if (!impl->ok) {
    impl->inv_diag = a.diagonal().real().cwiseAbs().cwiseMax(1e-300).cwiseInverse();
  }
  impl_ = impl;
}

Vec IcPreconditioner::operator()(const Vec& r) const {
  if (impl_->ok) return impl_->ic.solve(r);
  return impl_->inv_diag.cast<cplx>().cwiseProduct(r);
}

struct LdltSolver::Impl {
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

LdltSolver::LdltSolver(const SpMat& a) {
  auto impl = std::make_shared<Impl>();
  impl->ldlt.compute(a);
  if (impl->ldlt.info() != Eigen::Success) throw SolverError("LDL^T factorization failed", 0);
  impl_ = impl;
}

Vec LdltSolver::operator()(const Vec& r) const { return impl_->ldlt.solve(r); }

Vec random_unit_vector(int dim, std::uint64_t seed) {
  CounterRng rng(seed, 0x5eed);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = cplx(rng.uniform(static_cast<std::uint64_t>(i)) - 0.5, 0.0);
  return v / v.norm();
}

RitzPairs lanczos(const Apply& a, int dim, int steps, std::uint64_t seed) {
  const int k_max = std::max(1, std::min(steps, dim));
  Eigen::MatrixXcd q(dim, k_max);
  RVec alpha(k_max), beta(k_max);
  q.col(0) = random_unit_vector(dim, seed);
  int k = 0;
  for (; k < k_max; ++k) {
    Vec w = a(q.col(k));
    alpha[k] = q.col(k).dot(w).real();
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(k + 1) * (q.leftCols(k + 1).adjoint() * w);
    beta[k] = w.norm();
    if (k + 1 == k_max) break;
    if (beta[k] < 1e-13 * std::max(1.0, std::abs(alpha[k]))) break;  // invariant subspace
    q.col(k + 1) = w / beta[k];
  }
  const int size = std::min(k + 1, k_max);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < size) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  RitzPairs out;
  out.values = es.eigenvalues();
  out.vectors = q.leftCols(size) * es.eigenvectors().cast<cplx>();
  out.residuals.resize(size);
  for (int i = 0; i < size; ++i) {
    Vec v = out.vectors.col(i);
    v /= v.norm();
    out.vectors.col(i) = v;
    out.residuals[i] = (a(v) - out.values[i] * v).norm();
  }
  return out;
}

Eigen::MatrixXcd dense(const SpMat& m) { return Eigen::MatrixXcd(m); }

}  // namespace specband::linalg
