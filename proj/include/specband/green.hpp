#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "specband/common.hpp"
#include "specband/geometry.hpp"
#include "specband/operators.hpp"

namespace specband {

struct DecayPoint {
  double distance = 0;
  double norm = 0;
};

struct DecayFit {
  double log_prefactor = 0;  // log C1_hat
  double rate = 0;           // decay per unit length
  bool degenerate = false;   // all norms equal
  bool negative_rate = false;
};

struct DecayProfile {
  double lambda = 0;
  double delta = 0;
  std::vector<DecayPoint> points;
  DecayFit fit;

  nlohmann::json to_json() const;
};

struct BlockNormOptions {
  double solve_tol = 1e-10;
  double power_tol = 1e-8;
  int power_max_iter = 500;
  std::uint64_t seed = 0x9E3779B97F4A7C15ULL;
};

/// Distance from lambda to the spectrum of a hermitian operator:
/// lambda_min - lambda below the spectrum; otherwise 0.9 times the
/// distance to the nearest Lanczos Ritz value.
double spectral_distance(const SparseOperator& h, double lambda, double lambda_min);

/// ||chi_B1 (H - lambda)^{-1} chi_B2|| by power iteration on G^* G.
double resolvent_block_norm(const SparseOperator& h, double lambda, const std::vector<int>& b1,
                            const std::vector<int>& b2, const BlockNormOptions& opt = {});
/// Same with the spectral bottom known (selects the solver and validates
/// that lambda is in the resolvent set).
double resolvent_block_norm(const SparseOperator& h, double lambda, double lambda_min, const std::vector<int>& b1,
                            const std::vector<int>& b2, const BlockNormOptions& opt = {});

/// Dense oracle: forms the inverse, takes the block's largest singular value.
double resolvent_block_norm_dense(const SparseOperator& h, double lambda, const std::vector<int>& b1,
                                  const std::vector<int>& b2);

/// B1 = base, B2 = base shifted by `shifts[i]` cells along the first
/// longitudinal axis. Distances from box_distance.
DecayProfile decay_profile(const Grid& grid, const SparseOperator& h, double lambda, double lambda_min,
                           const SubBox& base, const std::vector<int>& shifts, const BlockNormOptions& opt = {});

/// Least squares of log norm against distance.
DecayFit fit_decay(const std::vector<DecayPoint>& points);

struct CtVerdict {
  bool pass = false;
  double margin = 0;  // min over points of log(bound) - log(norm)
};

/// Every point satisfies norm <= (2 / delta_scaled) exp(-rate * dist).
CtVerdict ct_verdict(const DecayProfile& profile, double delta_scaled, double rate);

}  // namespace specband
