#include "specband/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "specband/parallel.hpp"
#include "specband/random.hpp"

namespace specband {

const char* to_string(DistKind k) {
  switch (k) {
    case DistKind::UniformSymmetric: return "uniform_symmetric";
    case DistKind::BernoulliPm1: return "bernoulli_pm1";
    case DistKind::UniformPositive: return "uniform_positive";
    case DistKind::PointMass: return "point_mass";
    case DistKind::TwoPoint: return "two_point";
  }
  return "?";
}

DistKind dist_kind_from_string(const std::string& s) {
  for (auto k : {DistKind::UniformSymmetric, DistKind::BernoulliPm1, DistKind::UniformPositive, DistKind::PointMass,
                 DistKind::TwoPoint})
    if (s == to_string(k)) return k;
  throw DomainError("unknown distribution '" + s + "'");
}

void Distribution::validate() const {
  switch (kind) {
    case DistKind::PointMass:
      if (!(std::abs(value) <= 1)) throw DomainError("point mass must lie in [-1, 1]");
      break;
    case DistKind::TwoPoint:
      if (!(b_minus <= 0 && 0 <= b_plus && b_minus < b_plus)) throw DomainError("two_point needs b- <= 0 <= b+, b- < b+");
      if (!(b_minus >= -1 && b_plus <= 1)) throw DomainError("two_point support must lie in [-1, 1]");
      if (!(p >= 0 && p <= 1)) throw DomainError("two_point probability must lie in [0, 1]");
      break;
    default: break;
  }
}

double Distribution::e_abs() const {
  switch (kind) {
    case DistKind::UniformSymmetric:
    case DistKind::UniformPositive: return 0.5;
    case DistKind::BernoulliPm1: return 1.0;
    case DistKind::PointMass: return std::abs(value);
    case DistKind::TwoPoint: return (1 - p) * std::abs(b_minus) + p * std::abs(b_plus);
  }
  return 0;
}

double Distribution::e_sq() const {
  switch (kind) {
    case DistKind::UniformSymmetric:
    case DistKind::UniformPositive: return 1.0 / 3.0;
    case DistKind::BernoulliPm1: return 1.0;
    case DistKind::PointMass: return value * value;
    case DistKind::TwoPoint: return (1 - p) * b_minus * b_minus + p * b_plus * b_plus;
  }
  return 0;
}

double Distribution::sample(double u) const {
  switch (kind) {
    case DistKind::UniformSymmetric: return 2.0 * u - 1.0;
    case DistKind::BernoulliPm1: return u < 0.5 ? -1.0 : 1.0;
    case DistKind::UniformPositive: return u;
    case DistKind::PointMass: return value;
    case DistKind::TwoPoint: return u < 1.0 - p ? b_minus : b_plus;
  }
  return 0;
}

std::string Distribution::name() const { return to_string(kind); }

nlohmann::json Distribution::to_json() const {
  nlohmann::json j{{"kind", name()}, {"e_abs", e_abs()}, {"e_sq", e_sq()}};
  if (kind == DistKind::PointMass) j["value"] = value;
  if (kind == DistKind::TwoPoint) {
    j["b_minus"] = b_minus;
    j["b_plus"] = b_plus;
    j["p"] = p;
  }
  return j;
}

RandomConfig sample_configuration(const Distribution& dist, int cell_count, std::uint64_t seed,
                                  std::uint64_t sample) {
  if (cell_count < 1) throw DomainError("cell count must be positive");
  dist.validate();
  RandomConfig rc{dist, seed, sample, {}};
  const CounterRng rng(seed, sample);
  rc.omega.resize(cell_count);
  for (int k = 0; k < cell_count; ++k) rc.omega[k] = dist.sample(rng.uniform(static_cast<std::uint64_t>(k)));
  return rc;
}

EpsilonInterval epsilon_interval(int N, int gamma, double c1, double c2, double e_abs_omega) {
  if (gamma < 17) throw DomainError("gamma must be at least 17");
  if (N < 1 || !(c1 > 0) || !(c2 > 0) || !(e_abs_omega > 0)) throw DomainError("epsilon_interval: bad parameters");
  EpsilonInterval iv;
  iv.c3 = 2.0 / std::sqrt(c2);
  iv.lo = iv.c3 / (e_abs_omega * std::pow(static_cast<double>(N), 0.25));
  iv.hi = c1 / std::pow(static_cast<double>(N), 4.0 / gamma);
  return iv;
}

double epsilon_interval_threshold(int gamma, double c1, double c2, double e_abs_omega) {
  if (gamma < 17) throw DomainError("gamma must be at least 17");
  const double c3 = 2.0 / std::sqrt(c2);
  // c3 / (E N^{1/4}) = c1 N^{-4/gamma}  =>  N^{1/4 - 4/gamma} = c3 / (E c1)
  return std::pow(c3 / (e_abs_omega * c1), 1.0 / (0.25 - 4.0 / gamma));
}

Interval95 binomial_interval(long hits, long samples) {
  if (samples <= 0 || hits < 0 || hits > samples) throw DomainError("binomial_interval: bad counts");
  Interval95 ci;
  const double n = static_cast<double>(samples), k = static_cast<double>(hits);
  if (hits == 0) {
    ci.lo = 0;
    ci.hi = std::min(1.0, 3.0 / n);
    ci.one_sided = true;
    return ci;
  }
  const double alpha = 0.05;
  ci.lo = boost::math::ibeta_inv(k, n - k + 1, alpha / 2);
  ci.hi = hits == samples ? 1.0 : boost::math::ibeta_inv(k + 1, n - k, 1 - alpha / 2);
  return ci;
}

nlohmann::json TailEstimate::to_json() const {
  return {{"event", event},     {"samples", samples}, {"hits", hits},
          {"estimate", estimate}, {"ci_low", ci.lo},  {"ci_high", ci.hi},
          {"ci_one_sided", ci.one_sided}, {"seed", seed}};
}

TailEstimate make_estimate(std::string event, long hits, long samples, std::uint64_t seed) {
  TailEstimate t;
  t.event = std::move(event);
  t.samples = samples;
  t.hits = hits;
  t.estimate = static_cast<double>(hits) / static_cast<double>(samples);
  t.ci = binomial_interval(hits, samples);
  t.seed = seed;
  return t;
}

TailResult tail_probability(const BoxModel& model, const Distribution& dist, double epsilon, double threshold,
                            long samples, std::uint64_t seed, int workers) {
  if (samples < 1) throw DomainError("need at least one sample");
  const Grid& grid = *model.grid;
  TailResult out;
  out.records.resize(samples);
  parallel_for(static_cast<int>(samples), workers, [&](int i) {
    const auto rc = sample_configuration(dist, grid.cell_count(), seed, static_cast<std::uint64_t>(i));
    const auto h = assemble_randomized(grid, model.h0, *model.family, epsilon, rc.omega);
    EigenResult er;
    try {
      er = lowest_eigenpair(h, model.mode);
    } catch (const SolverError& e) {
      throw SolverError("sample " + std::to_string(i) + ": " + e.what(), e.residual());
    }
    SampleRecord& r = out.records[i];
    r.sample = static_cast<std::uint64_t>(i);
    r.lambda_min = er.lambda_min;
    r.gap = er.lambda_min - model.lambda0;
    r.hit = r.gap <= threshold;
    for (double w : rc.omega) r.sum_omega2 += w * w;
  });
  out.estimate = tail_from_records(out.records, threshold, seed);
  return out;
}

TailEstimate tail_from_records(const std::vector<SampleRecord>& records, double threshold, std::uint64_t seed) {
  long hits = 0;
  for (const auto& r : records) hits += r.gap <= threshold ? 1 : 0;
  return make_estimate("gap <= " + std::to_string(threshold), hits, static_cast<long>(records.size()), seed);
}

TailEstimate large_deviation_check(const Distribution& dist, int K, int n, long samples, std::uint64_t seed) {
  if (K < 1 || n < 1) throw DomainError("large_deviation_check needs K, n >= 1");
  if (samples < 1) throw DomainError("need at least one sample");
  const int cells = static_cast<int>(std::lround(std::pow(K, n)));
  const double level = dist.e_abs() / 2.0;
  long hits = 0;
  for (long s = 0; s < samples; ++s) {
    const auto rc = sample_configuration(dist, cells, seed, static_cast<std::uint64_t>(s));
    double sum = 0;
    for (double w : rc.omega) sum += std::abs(w);
    if (sum / cells <= level) ++hits;
  }
  return make_estimate("mean|omega| <= E|omega|/2 over K=" + std::to_string(K), hits, samples, seed);
}

LargeDeviationResult large_deviation_sweep(const Distribution& dist, const std::vector<int>& Ks, int n, long samples,
                                           std::uint64_t seed) {
  LargeDeviationResult out;
  std::vector<double> x, y;
  for (int K : Ks) {
    out.rows.push_back({K, large_deviation_check(dist, K, n, samples, seed)});
    const auto& e = out.rows.back().estimate;
    if (e.hits > 0) {
      x.push_back(std::pow(K, n));
      y.push_back(std::log(e.estimate));
    }
  }
  if (x.size() >= 2) {
    const int m = static_cast<int>(x.size());
    Eigen::MatrixXd a(m, 2);
    RVec b(m);
    for (int i = 0; i < m; ++i) {
      a(i, 0) = 1;
      a(i, 1) = x[i];
      b[i] = y[i];
    }
    out.c4_hat = -a.colPivHouseholderQr().solve(b)[1];
  }
  return out;
}

std::vector<double> ils_lambda_grid(double lambda0, int N, int points) {
  if (points < 3) throw DomainError("lambda grid needs at least three points");
  std::vector<double> g(points);
  const double top = 1.0 / (2.0 * std::sqrt(static_cast<double>(N)));
  for (int i = 0; i < points; ++i) g[i] = lambda0 + top * i / (points - 1);
  return g;
}

nlohmann::json IlsResult::to_json() const {
  return {{"success", success.to_json()},
          {"gap_event", gap_event.to_json()},
          {"chain_exceptions", chain_exceptions},
          {"distance", distance},
          {"lambda_grid", lambda_grid}};
}

IlsResult ils_experiment(const BoxModel& model, const Distribution& dist, double epsilon, const SubBox& b1,
                         const SubBox& b2, const std::vector<double>& lambda_grid, double c5, long samples,
                         std::uint64_t seed, int workers) {
  const Grid& grid = *model.grid;
  if (lambda_grid.size() < 3) throw DomainError("lambda grid needs at least three points");
  const double sqrt_n = std::sqrt(static_cast<double>(grid.spec().N));
  for (double l : lambda_grid)
    if (l < model.lambda0 - 1e-12 || l > model.lambda0 + 0.5 / sqrt_n + 1e-12)
      throw DomainError("lambda grid must lie in [Lambda0, Lambda0 + 1/(2 sqrt N)]");
  IlsResult out;
  out.lambda_grid = lambda_grid;
  out.distance = box_distance(grid, b1, b2);
  const auto p1 = grid.box_points(b1);
  const auto p2 = grid.box_points(b2);
  const double delta_s = 1.0 / sqrt_n;
  const double rate = c5 / sqrt_n;
  out.samples.resize(samples);
  parallel_for(static_cast<int>(samples), workers, [&](int i) {
    const auto rc = sample_configuration(dist, grid.cell_count(), seed, static_cast<std::uint64_t>(i));
    const auto h = assemble_randomized(grid, model.h0, *model.family, epsilon, rc.omega);
    IlsSample& s = out.samples[i];
    s.sample = static_cast<std::uint64_t>(i);
    try {
      s.lambda_min = lowest_eigenpair(h, model.mode).lambda_min;
      s.gap = s.lambda_min - model.lambda0;
      s.gap_event = s.gap > 1.0 / sqrt_n;
      s.decay_pass = true;
      s.min_margin = std::numeric_limits<double>::infinity();
      for (double l : lambda_grid) {
        if (!(l < s.lambda_min - 1e-9 * std::max(1.0, std::abs(s.lambda_min)))) {
          // energy not resolvably below the spectrum: the bound is not claimed here
          s.decay_pass = false;
          s.block_norms.push_back(std::numeric_limits<double>::quiet_NaN());
          continue;
        }
        const double nrm = resolvent_block_norm(h, l, s.lambda_min, p1, p2);
        s.block_norms.push_back(nrm);
        const double margin = std::log(2.0 / delta_s) - rate * out.distance - std::log(std::max(nrm, 1e-300));
        s.min_margin = std::min(s.min_margin, margin);
        if (margin < 0) s.decay_pass = false;
      }
    } catch (const SolverError& e) {
      throw SolverError("sample " + std::to_string(i) + ": " + e.what(), e.residual());
    }
  });
  long gap_hits = 0, success = 0;
  for (const auto& s : out.samples) {
    gap_hits += s.gap_event;
    success += s.gap_event && s.decay_pass;
    out.chain_exceptions += s.gap_event && !s.decay_pass;
  }
  out.gap_event = make_estimate("gap > N^{-1/2}", gap_hits, samples, seed);
  out.success = make_estimate("gap and decay", success, samples, seed);
  return out;
}

namespace {
void check_gamma(int gamma) {
  if (gamma < 17) throw DomainError("gamma must be at least 17");
}
}  // namespace

LifschitzCoupling lifschitz_coupling(double epsilon, double c1, int gamma) {
  check_gamma(gamma);
  if (!(c1 > 0) || !(epsilon > 0) || !(epsilon < c1)) throw DomainError("need 0 < epsilon < c1");
  const double r = epsilon / c1;
  LifschitzCoupling lc;
  lc.N_exact = std::pow(r, -gamma / 4.0);
  lc.N = std::max(1L, std::lround(lc.N_exact));
  lc.window = 0.5 * std::pow(r, gamma / 8.0);
  lc.prefactor = 2.0 * std::pow(r, -gamma / 8.0);
  lc.decay_factor = std::pow(r, gamma / 8.0);
  // r = N^{-4/gamma}: window ~ N^{(gamma/8)(-4/gamma)}
  lc.n_exponent_window = static_cast<double>(-4 * gamma) / (8 * gamma);
  lc.n_exponent_decay = 1.0 + lc.n_exponent_window;
  return lc;
}

LifschitzCoupling lifschitz_coupling_linear(double delta, double c1, int gamma) {
  check_gamma(gamma);
  if (!(c1 > 0) || !(delta > 0) || !(delta < c1 * c1)) throw DomainError("need 0 < delta < c1^2");
  const double r = delta / (c1 * c1);
  LifschitzCoupling lc;
  lc.N_exact = std::pow(r, -gamma / 8.0);
  lc.N = std::max(1L, std::lround(lc.N_exact));
  lc.window = 0.5 * std::pow(r, gamma / 16.0);
  lc.prefactor = 2.0 * std::pow(r, -gamma / 16.0);
  lc.decay_factor = std::pow(r, gamma / 16.0);
  // r = N^{-8/gamma}: window ~ N^{(gamma/16)(-8/gamma)}
  lc.n_exponent_window = static_cast<double>(-8 * gamma) / (16 * gamma);
  lc.n_exponent_decay = 1.0 + lc.n_exponent_window;
  return lc;
}

}  // namespace specband
