#include "specband/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specband/linalg.hpp"

namespace specband {

nlohmann::json CellAnalysis::to_json() const {
  nlohmann::json j;
  j["lambda0"] = lambda0;
  j["lambda1"] = lambda1;
  j["a1_residual"] = a1_residual;
  j["a1_tolerance"] = a1_tolerance;
  j["a1_ok"] = a1_ok;
  j["l2_pairing"] = l2_pairing;
  j["u_l1_pairing"] = u_l1_pairing;
  j["l1psi_norm2"] = l1psi_norm2;
  j["c0"] = c0;
  if (std::isfinite(c0_error)) j["c0_error"] = c0_error;
  j["a2_ok"] = a2_ok;
  j["sufficient_ok"] = sufficient_ok;
  j["diagnostics"] = {{"corrector_iterations", corrector.iterations},
                      {"corrector_residual", corrector.residual},
                      {"corrector_orthogonality", corrector.orthogonality},
                      {"rhs_projected", corrector.rhs_projected}};
  return j;
}

double check_a1(const PerturbationFamily& family, const CellSpectrum& cs) {
  return inner(family.l1 * cs.psi0, cs.psi0, cs.weight).real();
}

double a1_tolerance(const PerturbationFamily& family, const CellSpectrum& cs) {
  const double p = wnorm(cs.psi0, cs.weight);
  // rounding floor: when L1 psi0 vanishes to machine precision the relative
  // tolerance alone would be far below what the pairing can resolve
  const double floor = 64 * std::numeric_limits<double>::epsilon() * SparseOperator(family.l1).norm_estimate() * p * p;
  return std::max(1e-10 * wnorm(family.l1 * cs.psi0, cs.weight) * p, floor);
}

PerturbationFamily exactify_a1(const PerturbationFamily& family, const CellSpectrum& cs) {
  if (!family.l1_is_diagonal()) throw DomainError("exactify_a1 needs a multiplication-type L1");
  const Vec v1 = family.l1.diagonal();
  const double num = inner(v1.cwiseProduct(cs.psi0), cs.psi0, cs.weight).real();
  const double den = inner(cs.psi0, cs.psi0, cs.weight).real();
  const double c = num / den;
  PerturbationFamily out = family;
  if (c == 0.0) return out;
  const RVec nv1 = v1.real().array() - c;
  SpMat l1(nv1.size(), nv1.size());
  l1.reserve(Eigen::VectorXi::Constant(nv1.size(), 1));
  for (Eigen::Index i = 0; i < nv1.size(); ++i)
    if (nv1[i] != 0.0) l1.insert(i, i) = nv1[i];
  l1.makeCompressed();
  out.l1 = l1;
  out.v1 = nv1;
  return out;
}

CorrectorResult solve_corrector(const SparseOperator& cell_op, const CellSpectrum& cs, const Vec& rhs, double tol) {
  const double w = cs.weight;
  const Vec& psi = cs.psi0;
  auto project = [&](const Vec& v) -> Vec { return v - (w * psi.dot(v)) * psi; };

  CorrectorResult out;
  Vec b = project(rhs);
  const double rhs_norm = rhs.norm();
  out.rhs_projected = (rhs - b).norm() > 1e-10 * std::max(rhs_norm, 1e-300);
  // what is left after projecting a pure psi0 direction is rounding noise
  if (b.norm() <= 64 * std::numeric_limits<double>::epsilon() * rhs_norm) b.setZero();

  const SpMat& h = cell_op.matrix();
  const double l0 = cs.lambda0;
  SpMat shifted = h;
  {
    SpMat id(h.rows(), h.cols());
    id.setIdentity();
    shifted += id * cplx(1.0 - l0);
  }
  const linalg::LdltSolver prec(shifted);
  auto apply = [&](const Vec& x) -> Vec { return h * x - l0 * x; };

  out.u = Vec::Zero(h.rows());
  const auto st = linalg::pcg(apply, [&](const Vec& r) { return prec(r); }, b, out.u, tol, 2000, project);
  out.iterations = st.iterations;
  const double bn = b.norm();
  out.residual = bn > 0 ? (apply(out.u) - b).norm() / bn : 0.0;
  out.orthogonality = std::abs(inner(out.u, psi, w));
  if (out.residual > 1e-10) throw SolverError("corrector solve did not converge", out.residual);
  return out;
}

double compute_c0(const PerturbationFamily& family, const CellSpectrum& cs, const Vec& u) {
  const double l2p = inner(family.l2 * cs.psi0, cs.psi0, cs.weight).real();
  const double ul1 = inner(u, family.l1 * cs.psi0, cs.weight).real();
  return l2p - ul1;
}

bool sufficient_condition(const PerturbationFamily& family, const CellSpectrum& cs) {
  if (!(cs.lambda1 > cs.lambda0)) throw DomainError("sufficient condition needs lambda1 > lambda0");
  const double l2p = inner(family.l2 * cs.psi0, cs.psi0, cs.weight).real();
  const double n2 = std::pow(wnorm(family.l1 * cs.psi0, cs.weight), 2);
  return l2p > n2 / (cs.lambda1 - cs.lambda0);
}

CellAnalysis analyze_cell(const PerturbationFamily& family, const Grid& cell, std::span<const double> v0) {
  if (cell.cell_count() != 1) throw DomainError("analyze_cell expects a one-cell grid");
  if (family.dim() != cell.dim()) throw DomainError("family built for a different cell grid");
  const CellSpectrum cs = cell_spectrum(cell, v0);
  const SparseOperator h = cell_operator(cell, v0);

  CellAnalysis a;
  a.lambda0 = cs.lambda0;
  a.lambda1 = cs.lambda1;
  a.a1_residual = check_a1(family, cs);
  a.a1_tolerance = a1_tolerance(family, cs);
  a.a1_ok = std::abs(a.a1_residual) <= a.a1_tolerance;

  const Vec l1psi = family.l1 * cs.psi0;
  a.corrector = solve_corrector(h, cs, l1psi);
  a.l2_pairing = inner(family.l2 * cs.psi0, cs.psi0, cs.weight).real();
  a.u_l1_pairing = inner(a.corrector.u, l1psi, cs.weight).real();
  a.l1psi_norm2 = std::pow(wnorm(l1psi, cs.weight), 2);
  a.c0 = a.l2_pairing - a.u_l1_pairing;
  a.a2_ok = a.c0 > 0;
  a.sufficient_ok = sufficient_condition(family, cs);
  return a;
}

CellAnalysis whole_space_analysis(const PerturbationFamily& family, const Grid& cell) {
  if (!cell.spec().whole_space()) throw DomainError("whole_space_analysis expects a whole-space grid");
  return analyze_cell(family, cell, {});
}

TwoGridC0 two_grid_c0(const std::function<PerturbationFamily(const Grid&)>& build, const BoxSpec& cell_spec,
                      const BoundaryCondition& bc, const std::function<double(double)>& v0) {
  auto c0_at = [&](const BoxSpec& s) {
    const Grid cell(s, bc);
    const RVec v = v0 ? sample_transverse(cell, v0) : RVec();
    return analyze_cell(build(cell), cell, std::span<const double>(v.data(), v.size())).c0;
  };
  BoxSpec coarse = cell_spec;
  coarse.N = 1;
  coarse.p_long = std::max(2, cell_spec.p_long / 2);
  if (!cell_spec.whole_space()) coarse.m_trans = std::max(bc.all_dirichlet() ? 3 : 2, cell_spec.m_trans / 2);
  BoxSpec fine = cell_spec;
  fine.N = 1;
  TwoGridC0 out;
  out.c0_fine = c0_at(fine);
  out.c0_coarse = c0_at(coarse);
  out.error = std::abs(out.c0_fine - out.c0_coarse) / 3.0;
  return out;
}

namespace {

// Cosine coefficients c_q = (g, phi_q) / ||phi_q||^2 of g on the unit cube
// together with |q pi|^2 and ||phi_q||^2, flattened over the multi-index.
struct CosineData {
  std::vector<double> coef, freq2, norm2;
};

CosineData cosine_expand(const std::function<double(std::span<const double>)>& g, int n, const SeriesOptions& opt) {
  if (n < 1 || n > 2) throw DomainError("deformation series implemented for n = 1, 2");
  const int P = n == 1 ? opt.quadrature_points : std::min(opt.quadrature_points, 512);
  const int Q = n == 1 ? opt.cosine_modes : std::min(opt.cosine_modes, 128);
  Eigen::MatrixXd cosm(Q, P);
  for (int q = 0; q < Q; ++q)
    for (int i = 0; i < P; ++i) cosm(q, i) = std::cos(q * kPi * (i + 0.5) / P);
  const double hq = 1.0 / P;
  CosineData out;
  auto nrm = [](int q) { return q == 0 ? 1.0 : 0.5; };
  if (n == 1) {
    RVec gv(P);
    std::vector<double> x(1);
    for (int i = 0; i < P; ++i) {
      x[0] = (i + 0.5) * hq;
      gv[i] = g(x);
    }
    const RVec raw = cosm * gv * hq;
    for (int q = 0; q < Q; ++q) {
      out.norm2.push_back(nrm(q));
      out.coef.push_back(raw[q] / nrm(q));
      out.freq2.push_back(std::pow(q * kPi, 2));
    }
  } else {
    Eigen::MatrixXd gm(P, P);
    std::vector<double> x(2);
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j) {
        x[0] = (i + 0.5) * hq;
        x[1] = (j + 0.5) * hq;
        gm(i, j) = g(x);
      }
    const Eigen::MatrixXd raw = cosm * gm * cosm.transpose() * hq * hq;
    for (int q1 = 0; q1 < Q; ++q1)
      for (int q2 = 0; q2 < Q; ++q2) {
        const double nn = nrm(q1) * nrm(q2);
        out.norm2.push_back(nn);
        out.coef.push_back(raw(q1, q2) / nn);
        out.freq2.push_back(std::pow(q1 * kPi, 2) + std::pow(q2 * kPi, 2));
      }
  }
  return out;
}

}  // namespace

std::vector<double> deformation_c0_partial_sums(const std::function<double(std::span<const double>)>& g, int n,
                                                double d, int M, SeriesOptions opt) {
  if (M < 2) throw DomainError("deformation series needs at least M = 2 modes");
  if (!(d > 0)) throw DomainError("layer width must be positive");
  const CosineData cd = cosine_expand(g, n, opt);
  std::vector<double> sums;
  double s = 0;
  for (int m = 1; m <= M; ++m) {
    const double am = (m % 2 == 0) ? 4.0 * m / (d * (m * m - 1.0)) : 0.0;
    const double kappa = kPi * kPi * (m * m - 1.0) / (d * d);
    if (am != 0.0) {
      // (g, U_m) with U_m = (-Lap + kappa)^{-1} Lap g, Neumann on the cross-section
      double gu = 0;
      for (size_t q = 0; q < cd.coef.size(); ++q)
        gu -= cd.coef[q] * cd.coef[q] * cd.norm2[q] * cd.freq2[q] / (cd.freq2[q] + kappa);
      s += -(kPi * kPi / (d * d)) * am * am * (m * m - 1.0) * gu;
    }
    if (m >= 2) sums.push_back(s);
  }
  return sums;
}

double deformation_c0_series(const std::function<double(std::span<const double>)>& g, int n, double d, int M,
                             SeriesOptions opt) {
  return deformation_c0_partial_sums(g, n, d, M, opt).back();
}

}  // namespace specband
