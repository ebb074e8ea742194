#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specband/common.hpp"
#include "specband/geometry.hpp"
#include "specband/green.hpp"
#include "specband/operators.hpp"
#include "specband/spectral.hpp"

namespace specband {

enum class DistKind { UniformSymmetric, BernoulliPm1, UniformPositive, PointMass, TwoPoint };

/// Single-site coupling law. two_point puts mass p on b_plus and 1-p on
/// b_minus; point_mass uses `value`.
struct Distribution {
  DistKind kind = DistKind::UniformSymmetric;
  double value = 0;
  double b_minus = -1;
  double b_plus = 1;
  double p = 0.5;

  void validate() const;
  double e_abs() const;
  double e_sq() const;
  /// Inverse-CDF draw from u in [0,1).
  double sample(double u) const;
  std::string name() const;
  nlohmann::json to_json() const;
  bool operator==(const Distribution&) const = default;
};

const char* to_string(DistKind k);
DistKind dist_kind_from_string(const std::string& s);

struct RandomConfig {
  Distribution dist;
  std::uint64_t seed = 0;
  std::uint64_t sample = 0;
  std::vector<double> omega;
};

/// omega_k drawn from the counter stream (seed, sample, k).
RandomConfig sample_configuration(const Distribution& dist, int cell_count, std::uint64_t seed,
                                  std::uint64_t sample = 0);

struct EpsilonInterval {
  double lo = 0;
  double hi = 0;
  double c3 = 0;
  bool empty() const { return !(lo <= hi); }
};

/// I_N = [c3 / (E|omega| N^{1/4}), c1 / N^{4/gamma}], c3 = 2 / sqrt(c2).
EpsilonInterval epsilon_interval(int N, int gamma, double c1, double c2, double e_abs_omega);
/// Real N at which the two ends of I_N meet.
double epsilon_interval_threshold(int gamma, double c1, double c2, double e_abs_omega);

struct Interval95 {
  double lo = 0;
  double hi = 1;
  bool one_sided = false;
};
/// Exact (Clopper-Pearson) 95% interval; zero hits use the rule of three.
Interval95 binomial_interval(long hits, long samples);

struct TailEstimate {
  std::string event;
  long samples = 0;
  long hits = 0;
  double estimate = 0;
  Interval95 ci;
  std::uint64_t seed = 0;  // sample i uses counter stream (seed, i)

  nlohmann::json to_json() const;
};
TailEstimate make_estimate(std::string event, long hits, long samples, std::uint64_t seed);

struct SampleRecord {
  std::uint64_t sample = 0;
  double lambda_min = 0;
  double gap = 0;
  bool hit = false;
  double sum_omega2 = 0;
};

struct TailResult {
  TailEstimate estimate;
  std::vector<SampleRecord> records;
};

/// Shared model for the sampling experiments.
struct BoxModel {
  const Grid* grid = nullptr;
  SparseOperator h0;
  const PerturbationFamily* family = nullptr;
  double lambda0 = 0;
  EigenMode mode = EigenMode::Auto;
};

/// P(lambda_min - Lambda0 <= threshold) over `samples` configurations.
TailResult tail_probability(const BoxModel& model, const Distribution& dist, double epsilon, double threshold,
                            long samples, std::uint64_t seed, int workers);

/// Re-threshold an existing sample set (coupled estimate).
TailEstimate tail_from_records(const std::vector<SampleRecord>& records, double threshold, std::uint64_t seed);

struct LargeDeviationRow {
  int K = 0;
  TailEstimate estimate;
};
struct LargeDeviationResult {
  std::vector<LargeDeviationRow> rows;
  double c4_hat = std::numeric_limits<double>::quiet_NaN();  // from rows with hits
};

/// P((1/K^n) sum |omega_k| <= E|omega| / 2) over K^n cells.
TailEstimate large_deviation_check(const Distribution& dist, int K, int n, long samples, std::uint64_t seed);
LargeDeviationResult large_deviation_sweep(const Distribution& dist, const std::vector<int>& Ks, int n, long samples,
                                           std::uint64_t seed);

struct IlsSample {
  std::uint64_t sample = 0;
  double lambda_min = 0;
  double gap = 0;
  bool gap_event = false;
  bool decay_pass = false;
  double min_margin = 0;             // over the lambda grid
  std::vector<double> block_norms;   // per grid energy
};

struct IlsResult {
  TailEstimate success;    // gap event and decay pass
  TailEstimate gap_event;
  long chain_exceptions = 0;  // gap event holds but decay fails
  double distance = 0;
  std::vector<double> lambda_grid;
  std::vector<IlsSample> samples;

  nlohmann::json to_json() const;
};

/// Joint event of the initial length scale estimate: gap > N^{-1/2} and, at
/// every grid energy, ||chi_B1 R chi_B2|| <= 2 sqrt(N) exp(-c5 dist / sqrt(N)).
IlsResult ils_experiment(const BoxModel& model, const Distribution& dist, double epsilon, const SubBox& b1,
                         const SubBox& b2, const std::vector<double>& lambda_grid, double c5, long samples,
                         std::uint64_t seed, int workers);

/// Evenly spaced energies in [Lambda0, Lambda0 + 1/(2 sqrt N)], endpoints included.
std::vector<double> ils_lambda_grid(double lambda0, int N, int points);

struct LifschitzCoupling {
  double N_exact = 0;
  long N = 0;
  double window = 0;        // energy window above Lambda0
  double prefactor = 0;     // resolvent bound prefactor
  double decay_factor = 0;  // multiplies c5 dist in the exponent
  double n_exponent_window = 0;  // window ~ N^{this}
  double n_exponent_decay = 0;   // dist * decay_factor ~ N^{this} for dist ~ N
};

/// N = (eps/c1)^{-gamma/4}, window (1/2)(eps/c1)^{gamma/8}.
LifschitzCoupling lifschitz_coupling(double epsilon, double c1, int gamma);
/// Linear-coupling variant: N = (delta/c1^2)^{-gamma/8}, window (1/2)(delta/c1^2)^{gamma/16}.
LifschitzCoupling lifschitz_coupling_linear(double delta, double c1, int gamma);

}  // namespace specband
