#include "specband/green.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "specband/linalg.hpp"

namespace specband {

nlohmann::json DecayProfile::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({{"dist", p.distance}, {"norm", p.norm}});
  return {{"lambda", lambda},
          {"delta", delta},
          {"points", pts},
          {"fit",
           {{"log_prefactor", fit.log_prefactor},
            {"rate", fit.rate},
            {"degenerate", fit.degenerate},
            {"negative_rate", fit.negative_rate}}}};
}

double spectral_distance(const SparseOperator& h, double lambda, double lambda_min) {
  if (lambda < lambda_min) return lambda_min - lambda;
  const int dim = static_cast<int>(h.dim());
  const auto rp = linalg::lanczos([&](const Vec& x) -> Vec { return h.matrix() * x; }, dim, std::min(dim, 120),
                                  0xC0FFEEULL);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rp.values.size(); ++i) best = std::min(best, std::abs(rp.values[i] - lambda));
  return 0.9 * best;
}

namespace {

Vec restrict_to(const Vec& x, const std::vector<int>& idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = x[idx[i]];
  return out;
}

Vec extend(const Vec& y, const std::vector<int>& idx, Eigen::Index dim) {
  Vec out = Vec::Zero(dim);
  for (size_t i = 0; i < idx.size(); ++i) out[idx[i]] = y[static_cast<Eigen::Index>(i)];
  return out;
}

// Solver for (H - lambda) x = b: PCG when the shifted operator is positive
// definite, sparse LU otherwise.
class ShiftedSolver {
 public:
  ShiftedSolver(const SpMat& h, double lambda, bool definite, double tol) : tol_(tol), definite_(definite) {
    SpMat id(h.rows(), h.cols());
    id.setIdentity();
    a_ = h - id * cplx(lambda);
    a_.makeCompressed();
    if (definite_) {
      ic_ = std::make_unique<linalg::IcPreconditioner>(a_);
    } else {
      lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
      lu_->compute(a_);
      if (lu_->info() != Eigen::Success) throw SolverError("resolvent factorization failed (lambda in spectrum?)", 0);
    }
  }

  Vec solve(const Vec& b) const {
    if (!definite_) return lu_->solve(b);
    Vec x = Vec::Zero(b.size());
    const auto st = linalg::pcg([&](const Vec& v) -> Vec { return a_ * v; },
                                [&](const Vec& r) { return (*ic_)(r); }, b, x, tol_,
                                20 * static_cast<int>(b.size()) + 100);
    if (!st.converged) throw SolverError("resolvent solve did not converge", st.relative_residual);
    return x;
  }

 private:
  SpMat a_;
  double tol_;
  bool definite_;
  std::unique_ptr<linalg::IcPreconditioner> ic_;
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
};

double block_norm(const ShiftedSolver& solver, Eigen::Index dim, const std::vector<int>& b1,
                  const std::vector<int>& b2, const BlockNormOptions& opt) {
  if (b1.empty() || b2.empty()) throw DomainError("empty sub-box");
  // G = chi_B1 R chi_B2 acting on coordinates of B2; R hermitian so
  // G^* = chi_B2 R chi_B1.
  Vec y = linalg::random_unit_vector(static_cast<int>(b2.size()), opt.seed);
  double sigma2 = 0;
  for (int it = 0; it < opt.power_max_iter; ++it) {
    const Vec gy = restrict_to(solver.solve(extend(y, b2, dim)), b1);
    const Vec z = restrict_to(solver.solve(extend(gy, b1, dim)), b2);
    const double next = z.norm();
    if (next == 0.0) return 0.0;
    y = z / next;
    const bool done = std::abs(next - sigma2) <= opt.power_tol * next;
    sigma2 = next;
    if (done) break;
  }
  return std::sqrt(sigma2);
}

}  // namespace

double resolvent_block_norm(const SparseOperator& h, double lambda, double lambda_min, const std::vector<int>& b1,
                            const std::vector<int>& b2, const BlockNormOptions& opt) {
  if (!(lambda < lambda_min) && spectral_distance(h, lambda, lambda_min) <= 0)
    throw DomainError("probe energy lies in the spectrum");
  const ShiftedSolver solver(h.matrix(), lambda, lambda < lambda_min, opt.solve_tol);
  return block_norm(solver, h.dim(), b1, b2, opt);
}

double resolvent_block_norm(const SparseOperator& h, double lambda, const std::vector<int>& b1,
                            const std::vector<int>& b2, const BlockNormOptions& opt) {
  const auto rp = linalg::lanczos([&](const Vec& x) -> Vec { return h.matrix() * x; }, static_cast<int>(h.dim()),
                                  std::min<int>(static_cast<int>(h.dim()), 80), opt.seed);
  // Ritz values bound the bottom from above; stay conservative
  const double lmin_est = rp.values[0] - rp.residuals[0];
  return resolvent_block_norm(h, lambda, lambda < lmin_est ? lmin_est : -std::numeric_limits<double>::infinity(), b1,
                              b2, opt);
}

double resolvent_block_norm_dense(const SparseOperator& h, double lambda, const std::vector<int>& b1,
                                  const std::vector<int>& b2) {
  Eigen::MatrixXcd a = linalg::dense(h.matrix());
  a.diagonal().array() -= lambda;
  const Eigen::MatrixXcd inv = a.inverse();
  Eigen::MatrixXcd blk(b1.size(), b2.size());
  for (size_t i = 0; i < b1.size(); ++i)
    for (size_t j = 0; j < b2.size(); ++j) blk(i, j) = inv(b1[i], b2[j]);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(blk);
  return svd.singularValues()[0];
}

DecayProfile decay_profile(const Grid& grid, const SparseOperator& h, double lambda, double lambda_min,
                           const SubBox& base, const std::vector<int>& shifts, const BlockNormOptions& opt) {
  if (shifts.size() < 4) throw DomainError("decay profile needs at least four separations");
  DecayProfile prof;
  prof.lambda = lambda;
  prof.delta = spectral_distance(h, lambda, lambda_min);
  if (!(prof.delta > 0)) throw DomainError("probe energy is not in the resolvent set");
  const ShiftedSolver solver(h.matrix(), lambda, lambda < lambda_min, opt.solve_tol);
  const auto p1 = grid.box_points(base);
  for (int s : shifts) {
    SubBox b2 = base;
    b2.corner[0] += s;
    if (!grid.contains(b2)) throw DomainError("translated sub-box leaves the box");
    const double dist = box_distance(grid, base, b2);
    if (!prof.points.empty() && !(dist > prof.points.back().distance) && dist > 0)
      throw DomainError("separations must give strictly increasing distances");
    prof.points.push_back({dist, block_norm(solver, h.dim(), p1, grid.box_points(b2), opt)});
  }
  prof.fit = fit_decay(prof.points);
  return prof;
}

DecayFit fit_decay(const std::vector<DecayPoint>& points) {
  if (points.size() < 4) throw DomainError("fit_decay needs at least four points");
  const int m = static_cast<int>(points.size());
  Eigen::MatrixXd a(m, 2);
  RVec b(m);
  for (int i = 0; i < m; ++i) {
    if (!(points[i].norm > 0)) throw DomainError("fit_decay needs positive norms");
    a(i, 0) = 1.0;
    a(i, 1) = -points[i].distance;
    b[i] = std::log(points[i].norm);
  }
  DecayFit f;
  const double spread = b.maxCoeff() - b.minCoeff();
  const double dspread = a.col(1).maxCoeff() - a.col(1).minCoeff();
  if (spread <= 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()) || dspread == 0.0) {
    f.degenerate = true;
    f.log_prefactor = b.mean();
    return f;
  }
  const RVec x = a.colPivHouseholderQr().solve(b);
  f.log_prefactor = x[0];
  f.rate = x[1];
  f.negative_rate = f.rate < 0;
  return f;
}

CtVerdict ct_verdict(const DecayProfile& profile, double delta_scaled, double rate) {
  if (!(delta_scaled > 0)) throw DomainError("ct_verdict needs a positive spectral distance");
  CtVerdict v;
  v.margin = std::numeric_limits<double>::infinity();
  for (const auto& p : profile.points) {
    const double log_bound = std::log(2.0 / delta_scaled) - rate * p.distance;
    v.margin = std::min(v.margin, log_bound - std::log(std::max(p.norm, 1e-300)));
  }
  v.pass = v.margin >= 0;
  return v;
}

}  // namespace specband
