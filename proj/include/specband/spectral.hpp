#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specband/common.hpp"
#include "specband/geometry.hpp"
#include "specband/operators.hpp"

namespace specband {

enum class EigenMode { Auto, Dense, Iterative };

const char* to_string(EigenMode m);
EigenMode eigen_mode_from_string(const std::string& s);

struct EigenOptions {
  double tol = 1e-10;          // relative to the norm estimate of H
  int max_iterations = 200;    // inverse-iteration sweeps
  int lanczos_steps = 80;
  int dense_threshold = 64;    // Auto uses the dense solver up to this dimension
  std::uint64_t seed = 0x2545F4914F6CDD1DULL;
};

struct EigenResult {
  double lambda_min = 0;
  Vec vector;          // Euclidean-normalized
  double residual = 0; // ||H v - lambda v||
  double norm_estimate = 0;
  std::string method;  // "dense" or "iterative"
  int iterations = 0;
};

/// Ground eigenpair of a hermitian operator. The iterative path runs
/// Lanczos for a spectrum estimate, then inverse iteration at a shift below
/// it with incomplete-Cholesky preconditioned CG for the shifted solves.
EigenResult lowest_eigenpair(const SparseOperator& h, EigenMode mode = EigenMode::Auto, const EigenOptions& opt = {});

/// Lowest eigenvalue of H_cell + L(t) on a one-cell grid.
double single_cell_eigenvalue(const SparseOperator& cell_op, const PerturbationFamily& family, double t,
                              EigenMode mode = EigenMode::Auto);

/// min_k of the single-cell eigenvalues at t = eps * omega_k. Equal
/// couplings are solved once.
double bracketing_bound(const SparseOperator& cell_op, const PerturbationFamily& family, double epsilon,
                        std::span<const double> omega, EigenMode mode = EigenMode::Auto);

struct BoundReport {
  double lambda = 0;
  double lambda0 = 0;
  double lambda_gap = 0;  // lambda - Lambda0
  double rhs_value = 0;   // c2 eps^2 / N^n * sum omega_k^2
  double margin = 0;      // gap - rhs
  bool pass = false;
  double c2_hat = 0;
  double rho_hat = 0;

  nlohmann::json to_json() const;
};

/// Compare an eigenvalue with (c2 eps^2 / N^n) sum omega_k^2.
BoundReport check_deterministic_bound(double lambda, double lambda0, double epsilon, int N, int n,
                                      std::span<const double> omega, double c2_hat, double tol = 1e-9);

/// Largest c2 consistent with every (gap, eps, omega) sample:
/// min gap / (eps^2 / N^n * sum omega^2) over samples with nonzero omega.
/// Throws DomainError when no such sample exists.
double fit_c2(const std::vector<double>& gaps, const std::vector<double>& epsilons,
              const std::vector<std::vector<double>>& omegas, int N, int n);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct LiftingFit {
  double c0_hat = 0;
  double rho_hat = 0;
  std::vector<double> epsilons;
  std::vector<double> gaps;
};

/// Fit gap(eps) ~ c0 eps^2 - rho eps^3 by least squares. Throws if fewer
/// than four values are given or they span less than a factor 1.5.
LiftingFit fit_lifting(const std::vector<double>& epsilons, const std::vector<double>& gaps);

/// Periodic configuration omega = 1 on every cell of `grid`: returns
/// lambda(eps) for each eps and the quadratic/cubic fit.
LiftingFit lifting_periodic(const Grid& grid, std::span<const double> v0, const PerturbationFamily& family,
                            const std::vector<double>& epsilons, double lambda0, EigenMode mode = EigenMode::Auto);

struct Interval {
  double lo = 0;
  double hi = 0;
  bool empty() const { return !(lo < hi); }
};

/// (0, c1 / N^4); the whole-space variant has the same exponent.
Interval epsilon_regime(int N, double c1);

}  // namespace specband
