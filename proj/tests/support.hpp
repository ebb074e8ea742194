#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "specband/geometry.hpp"
#include "specband/operators.hpp"
#include "specband/perturbations.hpp"

namespace specband::testing {

inline Grid strip(int N, int p, int m, double d = kPi, Face lo = Face::Dirichlet, Face hi = Face::Dirichlet) {
  BoxSpec s;
  s.N = N;
  s.p_long = p;
  s.m_trans = m;
  s.d = d;
  return Grid(s, {lo, hi});
}

inline Grid cell_of(const Grid& g) { return g.cell_grid(); }

/// Dense hermitian eigenvalues, ascending.
inline Eigen::VectorXd dense_eigs(const SpMat& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(m)};
  return es.eigenvalues();
}

/// Reference potential family used across the suites.
inline PerturbationFamily reference_family(const Grid& cell, double a1 = 1.0, double v2 = 20.0) {
  auto v1f = [a1](std::span<const double> x) { return a1 * std::cos(2 * kPi * x[0]) * (1 + 0.5 * std::sin(x[1])); };
  auto v2f = [v2](std::span<const double> x) { return v2 * (1 + 0.5 * std::cos(2 * kPi * x[0])); };
  return potential_family(cell, sample_cell(cell, v1f), sample_cell(cell, v2f));
}

inline SpMat stencil_identity(int n) {
  SpMat m(n, n);
  m.setIdentity();
  return m;
}

/// sin^4 bump on (a, b), zero outside.
inline double bump(double x, double a, double b) {
  if (x <= a || x >= b) return 0.0;
  return std::pow(std::sin(kPi * (x - a) / (b - a)), 4);
}

inline double max_abs(const SpMat& m) {
  double r = 0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

}  // namespace specband::testing
