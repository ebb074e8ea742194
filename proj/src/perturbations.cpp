#include "specband/perturbations.hpp"

#include <cmath>

#include "specband/stencil.hpp"

namespace specband {

namespace {

using stencil::along_axis;
using stencil::identity;
using stencil::tensor;

constexpr double kTraceTol = 1e-9;

// Coordinates of entry `flat` of a row-major multi-index with per-axis
// extents and offsets (offset 0.5 for nodes, 1.0 for forward edges).
std::vector<double> long_location(int flat, const std::vector<int>& extent, const std::vector<double>& offset,
                                  double h) {
  const int n = static_cast<int>(extent.size());
  std::vector<double> x(n);
  for (int a = n - 1; a >= 0; --a) {
    x[a] = (flat % extent[a] + offset[a]) * h;
    flat /= extent[a];
  }
  return x;
}

int product(const std::vector<int>& v) {
  int r = 1;
  for (int x : v) r *= x;
  return r;
}

// Sample locations (full cell-local coordinates) of the rows of an operator
// whose longitudinal part has the given extents/offsets and whose transverse
// part has the given coordinates.
std::vector<std::vector<double>> locations(const std::vector<int>& extent, const std::vector<double>& offset, double h,
                                           const RVec& trans) {
  std::vector<std::vector<double>> out;
  const int nl = product(extent);
  out.reserve(static_cast<size_t>(nl) * trans.size());
  for (int l = 0; l < nl; ++l) {
    auto x = long_location(l, extent, offset, h);
    x.push_back(0);
    for (Eigen::Index j = 0; j < trans.size(); ++j) {
      x.back() = trans[j];
      out.push_back(x);
    }
  }
  return out;
}

RVec node_trans(const Grid& cell) {
  RVec t(cell.m_trans());
  for (int j = 0; j < cell.m_trans(); ++j) t[j] = cell.trans_coord(j);
  return t;
}

// Nodal and edge operators of one cell, shared by the differential families.
struct CellCalculus {
  int n, p, m;
  double h;
  std::vector<RSpMat> fwd;      // forward differences per longitudinal axis
  std::vector<RSpMat> ctr;      // centered differences per longitudinal axis
  std::vector<std::vector<std::vector<double>>> fwd_loc;
  std::vector<std::vector<double>> node_loc;
  RSpMat gt, avg_t;             // transverse edge difference / averaging
  RVec wt;                      // transverse edge weights (expanded)
  std::vector<std::vector<double>> tedge_loc;
  RSpMat ct;                    // centered transverse difference, zero ghosts

  explicit CellCalculus(const Grid& cell)
      : n(cell.n()), p(cell.p_long()), m(cell.m_trans()), h(cell.h_long()) {
    const std::vector<int> nodes_ext(n, p);
    const std::vector<double> node_off(n, 0.5);
    node_loc = locations(nodes_ext, node_off, h, node_trans(cell));
    for (int a = 0; a < n; ++a) {
      fwd.push_back(tensor(along_axis(stencil::forward_difference_1d(p, h), a, n, p), identity(m)));
      ctr.push_back(tensor(along_axis(stencil::centered_difference_1d(p, h), a, n, p), identity(m)));
      auto ext = nodes_ext;
      auto off = node_off;
      ext[a] = p - 1;
      off[a] = 1.0;
      fwd_loc.push_back(locations(ext, off, h, node_trans(cell)));
    }
    const auto te = stencil::transverse_edges(m, cell.h_trans(), cell.bc());
    const int nl = cell.long_points();
    gt = tensor(identity(nl), te.diff);
    avg_t = tensor(identity(nl), te.average);
    wt = RVec(nl * te.weights.size());
    for (int l = 0; l < nl; ++l) wt.segment(l * te.weights.size(), te.weights.size()) = te.weights;
    tedge_loc = locations(nodes_ext, node_off, h, te.coords);
    ct = tensor(identity(nl), stencil::centered_difference_1d(m, cell.h_trans()));
  }
};

bool near_lateral(std::span<const double> x, int n, double h) {
  for (int a = 0; a < n; ++a)
    if (std::min(x[a], 1.0 - x[a]) < 0.75 * h) return true;
  return false;
}

// Evaluate a coefficient at `loc`, enforcing exact zeros near the lateral
// faces; returns the largest magnitude seen there (for admissibility checks).
Eigen::VectorXcd evaluate(const CField& f, const std::vector<std::vector<double>>& loc, int n, double h,
                          double& ring_max) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(loc.size()));
  if (!f) return v;
  for (size_t i = 0; i < loc.size(); ++i) {
    const cplx val = f(loc[i]);
    if (near_lateral(loc[i], n, h)) {
      ring_max = std::max(ring_max, std::abs(val));
    } else {
      v[static_cast<Eigen::Index>(i)] = val;
    }
  }
  return v;
}

SpMat cdiag(const Eigen::VectorXcd& v) {
  SpMat d(v.size(), v.size());
  std::vector<Eigen::Triplet<cplx>> t;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] != cplx(0)) t.emplace_back(i, i, v[i]);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

// Form matrix of -sum d_i c_ij d_j; see metric_family.
SpMat divergence_form(const Grid& cell, const CellCalculus& cc, const CoefficientMatrix& c, const char* what) {
  const int n = cc.n;
  const int dim = cell.dim();
  if (c.empty()) return SpMat(dim, dim);
  if (static_cast<int>(c.size()) != n + 1) throw DomainError(std::string(what) + ": coefficient matrix must be (n+1)x(n+1)");
  for (const auto& row : c)
    if (static_cast<int>(row.size()) != n + 1)
      throw DomainError(std::string(what) + ": coefficient matrix must be (n+1)x(n+1)");

  double ring_max = 0, scale = 0;
  auto eval = [&](const CField& f, const std::vector<std::vector<double>>& loc) {
    auto v = evaluate(f, loc, n, cc.h, ring_max);
    if (v.size()) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    return v;
  };
  auto check_pair = [&](const Eigen::VectorXcd& upper, const Eigen::VectorXcd& lower, int i, int j) {
    const double tol = 1e-12 * std::max(1.0, std::max(upper.size() ? upper.cwiseAbs().maxCoeff() : 0.0,
                                                      lower.size() ? lower.cwiseAbs().maxCoeff() : 0.0));
    if ((upper - lower.conjugate()).cwiseAbs().maxCoeff() > tol)
      throw DomainError(std::string(what) + ": coefficient symmetry violated for (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ")");
  };

  SpMat out(dim, dim);
  const int t = n;
  for (int i = 0; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      if (i == j) {
        if (i < n) {
          auto v = eval(c[i][i], cc.fwd_loc[i]);
          if (v.imag().cwiseAbs().maxCoeff() > 0) throw DomainError(std::string(what) + ": diagonal coefficients must be real");
          const RSpMat& g = cc.fwd[i];
          out += stencil::to_complex(RSpMat(g.transpose() * stencil::diag(v.real()) * g));
        } else {
          auto v = eval(c[t][t], cc.tedge_loc);
          if (v.imag().cwiseAbs().maxCoeff() > 0) throw DomainError(std::string(what) + ": diagonal coefficients must be real");
          RVec w = cc.wt.cwiseProduct(v.real());
          out += stencil::to_complex(RSpMat(cc.gt.transpose() * stencil::diag(w) * cc.gt));
        }
        continue;
      }
      if (!c[i][j] && !c[j][i]) continue;
      if (j < n) {
        auto up = eval(c[i][j], cc.node_loc);
        auto lo = eval(c[j][i], cc.node_loc);
        check_pair(up, lo, i, j);
        const SpMat ci = stencil::to_complex(cc.ctr[i]);
        const SpMat cj = stencil::to_complex(cc.ctr[j]);
        SpMat term = SpMat(ci.transpose()) * cdiag(up) * cj;
        out += term;
        out += SpMat(term.adjoint());
      } else {
        // (i longitudinal, transverse): transverse edges carry d_t and the
        // averaged centered d_i.
        auto up = eval(c[i][t], cc.tedge_loc);  // a_{i,t}: d_t u against d_i v
        auto lo = eval(c[t][i], cc.tedge_loc);
        check_pair(up, lo, i, t);
        const SpMat di = stencil::to_complex(RSpMat(cc.avg_t * cc.ctr[i]));
        const SpMat gt = stencil::to_complex(cc.gt);
        SpMat term = SpMat(di.transpose()) * cdiag(cc.wt.cast<cplx>().cwiseProduct(up)) * gt;
        out += term;
        out += SpMat(term.adjoint());
      }
    }
  }
  if (ring_max > kTraceTol * std::max(1.0, scale))
    throw DomainError(std::string(what) + ": coefficients do not vanish near the lateral cell boundary (max " +
                      std::to_string(ring_max) + ")");
  out = SpMat(0.5 * (out + SpMat(out.adjoint())));
  out.prune(cplx(0));
  return out;
}

}  // namespace

bool on_lateral_ring(const Grid& cell, std::span<const double> x) { return near_lateral(x, cell.n(), cell.h_long()); }

RVec sample_cell(const Grid& cell, const Field& f) {
  RVec v(cell.dim());
  for (int g = 0; g < cell.dim(); ++g) v[g] = f(cell.local_point(g));
  return v;
}

Eigen::MatrixXcd sample_kernel(const Grid& cell,
                               const std::function<cplx(std::span<const double>, std::span<const double>)>& k) {
  const int dim = cell.dim();
  std::vector<std::vector<double>> pts(dim);
  for (int g = 0; g < dim; ++g) pts[g] = cell.local_point(g);
  Eigen::MatrixXcd out(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) out(r, c) = k(pts[r], pts[c]);
  return out;
}

PerturbationFamily potential_family(const Grid& cell, const RVec& v1, const RVec& v2) {
  if (v1.size() != cell.dim() || v2.size() != cell.dim())
    throw DomainError("potential samples do not match the cell grid");
  if (!v1.allFinite() || !v2.allFinite()) throw DomainError("potential samples must be finite");
  PerturbationFamily f;
  f.name = "potential";
  f.origin = "multiplication by V1, V2";
  f.l1 = stencil::to_complex(stencil::diag(v1));
  f.l2 = stencil::to_complex(stencil::diag(v2));
  f.l1.prune(cplx(0));
  f.l2.prune(cplx(0));
  f.v1 = v1;
  f.v2 = v2;
  return f;
}

PerturbationFamily potential_family(const Grid& cell, const Vec& v1, const Vec& v2) {
  if (v1.imag().cwiseAbs().maxCoeff() != 0.0 || v2.imag().cwiseAbs().maxCoeff() != 0.0)
    throw DomainError("potential samples must be real");
  return potential_family(cell, RVec(v1.real()), RVec(v2.real()));
}

PerturbationFamily magnetic_family(const Grid& cell, const std::vector<Field>& a) {
  const int n = cell.n();
  if (static_cast<int>(a.size()) != n + 1) throw DomainError("magnetic field needs n+1 components");
  const CellCalculus cc(cell);
  const int dim = cell.dim();
  RSpMat s(dim, dim);
  RVec a2 = RVec::Zero(dim);
  double ring_max = 0, scale = 0;
  for (int c = 0; c <= n; ++c) {
    if (!a[c]) continue;
    RVec ac(dim);
    for (int g = 0; g < dim; ++g) {
      const double v = a[c](cc.node_loc[g]);
      scale = std::max(scale, std::abs(v));
      if (near_lateral(cc.node_loc[g], n, cc.h)) {
        ring_max = std::max(ring_max, std::abs(v));
        ac[g] = 0;
      } else {
        ac[g] = v;
      }
    }
    const RSpMat& d = c < n ? cc.ctr[c] : cc.ct;
    const RSpMat da = stencil::diag(ac);
    s += RSpMat(da * d) + RSpMat(d * da);
    a2 += ac.cwiseProduct(ac);
  }
  if (ring_max > kTraceTol * std::max(1.0, scale))
    throw DomainError("magnetic field does not vanish near the lateral cell boundary (max " + std::to_string(ring_max) + ")");
  PerturbationFamily f;
  f.name = "magnetic";
  f.origin = "(i grad + A)^2 expanded to first and second order";
  s.prune(0.0);
  f.l1 = stencil::to_complex(s) * cplx(0, 1);
  f.l2 = stencil::to_complex(stencil::diag(a2));
  f.l2.prune(cplx(0));
  return f;
}

PerturbationFamily metric_family(const Grid& cell, const CoefficientMatrix& a, const CoefficientMatrix& b) {
  const CellCalculus cc(cell);
  PerturbationFamily f;
  f.name = "metric";
  f.origin = "divergence-form coefficient perturbation";
  f.l1 = divergence_form(cell, cc, a, "metric a_ij");
  f.l2 = divergence_form(cell, cc, b, "metric b_ij");
  return f;
}

PerturbationFamily integral_family(const Grid& cell, const Eigen::MatrixXcd& k1, const Eigen::MatrixXcd& k2) {
  const int dim = cell.dim();
  auto build = [&](const Eigen::MatrixXcd& k, const char* which) {
    if (k.rows() != dim || k.cols() != dim) throw DomainError(std::string(which) + ": kernel does not match the cell grid");
    const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
    if ((k - k.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw DomainError(std::string(which) + ": kernel violates K(x,y) = conj(K(y,x))");
    std::vector<Eigen::Triplet<cplx>> t;
    const double w = cell.weight();
    for (int r = 0; r < dim; ++r) {
      const double dr = w * k(r, r).real();
      if (dr != 0) t.emplace_back(r, r, cplx(dr, 0));
      for (int c = r + 1; c < dim; ++c) {
        const cplx v = 0.5 * w * (k(r, c) + std::conj(k(c, r)));
        if (v == cplx(0)) continue;
        t.emplace_back(r, c, v);
        t.emplace_back(c, r, std::conj(v));
      }
    }
    SpMat m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  };
  PerturbationFamily f;
  f.name = "integral";
  f.origin = "integral operators with hermitian kernels";
  f.l1 = build(k1, "K1");
  f.l2 = build(k2, "K2");
  return f;
}

PerturbationFamily boundary_deformation_family(const Grid& cell, const Field& g) {
  if (!cell.bc().all_dirichlet()) throw DomainError("boundary deformation requires Dirichlet transverse faces");
  const int n = cell.n();
  const double h = cell.h_long();
  // support check on the nodal profile
  double ring_max = 0, scale = 0;
  for (int gi = 0; gi < cell.dim(); gi += cell.m_trans()) {
    const auto x = cell.local_point(gi);
    const double v = std::abs(g(x));
    scale = std::max(scale, v);
    if (near_lateral(x, n, h)) ring_max = std::max(ring_max, v);
  }
  if (ring_max > kTraceTol * std::max(1.0, scale))
    throw DomainError("deformation profile is not supported inside the cell");

  // pointwise gradient of the profile; a grid-spacing stencil would reach
  // into the support from ring points where g itself vanishes
  constexpr double step = 1e-5;
  auto grad = [g](std::span<const double> x, int j) {
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
    xp[j] += step;
    xm[j] -= step;
    return (g(xp) - g(xm)) / (2 * step);
  };
  CoefficientMatrix a(n + 1, std::vector<CField>(n + 1));
  CoefficientMatrix b(n + 1, std::vector<CField>(n + 1));
  for (int j = 0; j < n; ++j) {
    a[j][n] = [grad, j](std::span<const double> x) { return cplx(-grad(x, j)); };
    a[n][j] = a[j][n];
  }
  b[n][n] = [grad, n](std::span<const double> x) {
    double s = 0;
    for (int j = 0; j < n; ++j) s += grad(x, j) * grad(x, j);
    return cplx(s);
  };
  PerturbationFamily f = metric_family(cell, a, b);
  f.name = "boundary_deformation";
  f.origin = "straightened Dirichlet layer with wiggled boundary";
  return f;
}

PerturbationFamily linear_positive_family(const Grid& cell, const SpMat& l2, const CellSpectrum& cs) {
  if (l2.rows() != cell.dim() || l2.cols() != cell.dim()) throw DomainError("L2 does not match the cell grid");
  if (!SparseOperator(l2).is_exactly_hermitian()) throw DomainError("L2 must be hermitian");
  const double q = inner(l2 * cs.psi0, cs.psi0, cs.weight).real();
  if (!(q > 0)) throw DomainError("linear positive family requires (L2 psi0, psi0) > 0");
  PerturbationFamily f;
  f.name = "linear_positive";
  f.origin = "L1 = 0, nonnegative couplings omega^2";
  f.l1 = SpMat(cell.dim(), cell.dim());
  f.l2 = l2;
  return f;
}

}  // namespace specband
