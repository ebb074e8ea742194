#include "specband/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <spdlog/spdlog.h>

#include "specband/linalg.hpp"

namespace specband {

const char* to_string(EigenMode m) {
  switch (m) {
    case EigenMode::Dense: return "dense";
    case EigenMode::Iterative: return "iterative";
    default: return "auto";
  }
}

EigenMode eigen_mode_from_string(const std::string& s) {
  if (s == "auto") return EigenMode::Auto;
  if (s == "dense") return EigenMode::Dense;
  if (s == "iterative") return EigenMode::Iterative;
  throw DomainError("unknown eigen mode '" + s + "'");
}

namespace {

EigenResult dense_ground(const SparseOperator& h) {
  EigenResult r;
  r.method = "dense";
  r.norm_estimate = h.norm_estimate();
  if (h.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(h.real_matrix()));
    if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed", 0);
    r.lambda_min = es.eigenvalues()[0];
    r.vector = es.eigenvectors().col(0).cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(linalg::dense(h.matrix()));
    if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed", 0);
    r.lambda_min = es.eigenvalues()[0];
    r.vector = es.eigenvectors().col(0);
  }
  r.residual = (h.apply(r.vector) - r.lambda_min * r.vector).norm();
  return r;
}

SpMat shifted(const SpMat& a, double sigma) {
  SpMat id(a.rows(), a.cols());
  id.setIdentity();
  SpMat s = a - id * cplx(sigma);
  s.makeCompressed();
  return s;
}

// Number of eigenvalues of A below sigma, from the LDL^T pivots.
int count_below(const SpMat& a, double sigma) {
  Eigen::SimplicialLDLT<SpMat> ldlt(shifted(a, sigma));
  if (ldlt.info() != Eigen::Success) return -1;
  const Vec dvec = ldlt.vectorD();
  int neg = 0;
  for (Eigen::Index i = 0; i < dvec.size(); ++i)
    if (!(dvec[i].real() > 0)) ++neg;
  return neg;
}

EigenResult iterative_ground(const SparseOperator& h, const EigenOptions& opt) {
  const SpMat& a = h.matrix();
  const int dim = static_cast<int>(h.dim());
  EigenResult r;
  r.method = "iterative";
  r.norm_estimate = h.norm_estimate();
  const double scale = std::max(r.norm_estimate, 1e-300);
  const double target = opt.tol * scale;

  auto apply = [&](const Vec& x) -> Vec { return a * x; };
  const auto rp = linalg::lanczos(apply, dim, opt.lanczos_steps, opt.seed);
  const double th1 = rp.values[0];
  const double th2 = rp.values.size() > 1 ? rp.values[1] : th1 + scale;
  double margin = std::max({2.0 * rp.residuals[0], 0.1 * (th2 - th1), 1e-6 * scale});
  double sigma = th1 - margin;
  // make sure the shift lies below the whole spectrum
  for (int k = 0; count_below(a, sigma) != 0; ++k) {
    if (k > 60) throw SolverError("could not place a shift below the spectrum", rp.residuals[0]);
    margin *= 2.0;
    sigma = th1 - margin;
  }

  const SpMat s = shifted(a, sigma);
  const linalg::IcPreconditioner ic(s);
  auto apply_s = [&](const Vec& x) -> Vec { return s * x; };
  Vec v = rp.vectors.col(0);
  v /= v.norm();
  double lambda = v.dot(a * v).real();
  double res = (a * v - lambda * v).norm();
  int it = 0;
  do {
    Vec x = v / std::max(lambda - sigma, 1e-300);
    const auto st = linalg::pcg(apply_s, [&](const Vec& q) { return ic(q); }, v, x, 1e-13, 20 * dim + 100);
    if (!st.converged && st.relative_residual > 1e-8)
      throw SolverError("shifted solve failed in inverse iteration", st.relative_residual);
    v = x / x.norm();
    lambda = v.dot(a * v).real();
    res = (a * v - lambda * v).norm();
    ++it;
  } while (res > target && it < opt.max_iterations);
  if (res > target) throw SolverError("inverse iteration did not converge", res);
  r.lambda_min = lambda;
  r.vector = v;
  r.residual = res;
  r.iterations = it;
  return r;
}

}  // namespace

EigenResult lowest_eigenpair(const SparseOperator& h, EigenMode mode, const EigenOptions& opt) {
  if (h.dim() == 0) throw DomainError("empty operator");
  if (!h.hermitian()) throw DomainError("lowest_eigenpair needs a hermitian operator");
  if (mode == EigenMode::Auto) mode = h.dim() <= opt.dense_threshold ? EigenMode::Dense : EigenMode::Iterative;
  EigenResult r = mode == EigenMode::Dense ? dense_ground(h) : iterative_ground(h, opt);
  spdlog::debug("ground state {} dim={} lambda={:.15g} residual={:.3e}", r.method, h.dim(), r.lambda_min,
                r.residual);
  return r;
}

double single_cell_eigenvalue(const SparseOperator& cell_op, const PerturbationFamily& family, double t,
                              EigenMode mode) {
  if (t == 0.0) return lowest_eigenpair(cell_op, mode).lambda_min;
  return lowest_eigenpair(cell_op + family_at(family, t), mode).lambda_min;
}

double bracketing_bound(const SparseOperator& cell_op, const PerturbationFamily& family, double epsilon,
                        std::span<const double> omega, EigenMode mode) {
  std::map<double, double> cache;
  double best = std::numeric_limits<double>::infinity();
  for (double w : omega) {
    const double t = epsilon * w;
    auto it = cache.find(t);
    if (it == cache.end()) it = cache.emplace(t, single_cell_eigenvalue(cell_op, family, t, mode)).first;
    best = std::min(best, it->second);
  }
  return best;
}

nlohmann::json BoundReport::to_json() const {
  return {{"lambda", lambda}, {"lambda0", lambda0}, {"gap", lambda_gap}, {"rhs", rhs_value},
          {"margin", margin}, {"pass", pass},       {"c2_hat", c2_hat},  {"rho_hat", rho_hat}};
}

BoundReport check_deterministic_bound(double lambda, double lambda0, double epsilon, int N, int n,
                                      std::span<const double> omega, double c2_hat, double tol) {
  BoundReport b;
  b.lambda = lambda;
  b.lambda0 = lambda0;
  b.lambda_gap = lambda - lambda0;
  double s = 0;
  for (double w : omega) s += w * w;
  b.rhs_value = c2_hat * epsilon * epsilon / std::pow(static_cast<double>(N), n) * s;
  b.margin = b.lambda_gap - b.rhs_value;
  b.pass = b.margin >= -tol;
  b.c2_hat = c2_hat;
  return b;
}

double fit_c2(const std::vector<double>& gaps, const std::vector<double>& epsilons,
              const std::vector<std::vector<double>>& omegas, int N, int n) {
  if (gaps.size() != epsilons.size() || gaps.size() != omegas.size()) throw DomainError("fit_c2: length mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < gaps.size(); ++i) {
    double s = 0;
    for (double w : omegas[i]) s += w * w;
    const double denom = epsilons[i] * epsilons[i] / std::pow(static_cast<double>(N), n) * s;
    if (denom > 0) best = std::min(best, gaps[i] / denom);
  }
  if (!std::isfinite(best)) throw DomainError("fit_c2: no sample with nonzero coupling");
  return best;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope needs two or more points");
  const int m = static_cast<int>(x.size());
  Eigen::MatrixXd a(m, 2);
  RVec b(m);
  for (int i = 0; i < m; ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw DomainError("loglog_slope needs positive data");
    a(i, 0) = 1.0;
    a(i, 1) = std::log(x[i]);
    b[i] = std::log(y[i]);
  }
  return a.colPivHouseholderQr().solve(b)[1];
}

LiftingFit fit_lifting(const std::vector<double>& epsilons, const std::vector<double>& gaps) {
  if (epsilons.size() != gaps.size()) throw DomainError("fit_lifting: length mismatch");
  if (epsilons.size() < 4) throw DomainError("fit_lifting needs at least four coupling values");
  const auto [lo, hi] = std::minmax_element(epsilons.begin(), epsilons.end());
  if (!(*lo > 0) || *hi < 1.5 * *lo) throw DomainError("fit_lifting: coupling list too narrow for a stable fit");
  // gap / eps^2 = c0 - rho eps
  const int m = static_cast<int>(epsilons.size());
  Eigen::MatrixXd a(m, 2);
  RVec b(m);
  for (int i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = -epsilons[i];
    b[i] = gaps[i] / (epsilons[i] * epsilons[i]);
  }
  const RVec x = a.colPivHouseholderQr().solve(b);
  LiftingFit f;
  f.c0_hat = x[0];
  f.rho_hat = x[1];
  f.epsilons = epsilons;
  f.gaps = gaps;
  return f;
}

LiftingFit lifting_periodic(const Grid& grid, std::span<const double> v0, const PerturbationFamily& family,
                            const std::vector<double>& epsilons, double lambda0, EigenMode mode) {
  const SparseOperator h0 = assemble_unperturbed(grid, v0);
  const std::vector<double> ones(grid.cell_count(), 1.0);
  std::vector<double> gaps;
  for (double e : epsilons) {
    const auto h = assemble_randomized(grid, h0, family, e, ones);
    gaps.push_back(lowest_eigenpair(h, mode).lambda_min - lambda0);
  }
  return fit_lifting(epsilons, gaps);
}

Interval epsilon_regime(int N, double c1) {
  if (N < 1) throw DomainError("N must be positive");
  if (!(c1 > 0)) throw DomainError("c1 must be positive");
  return {0.0, c1 / std::pow(static_cast<double>(N), 4)};
}

}  // namespace specband
