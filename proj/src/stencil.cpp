#include "specband/stencil.hpp"

#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

namespace specband::stencil {

namespace {
using Trip = Eigen::Triplet<double>;

RSpMat from_triplets(int rows, int cols, const std::vector<Trip>& t) {
  RSpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}
}  // namespace

RSpMat neumann_laplacian_1d(int points, double h) {
  std::vector<Trip> t;
  const double s = 1.0 / (h * h);
  for (int i = 0; i + 1 < points; ++i) {
    t.emplace_back(i, i, s);
    t.emplace_back(i + 1, i + 1, s);
    t.emplace_back(i, i + 1, -s);
    t.emplace_back(i + 1, i, -s);
  }
  if (points == 1) t.emplace_back(0, 0, 0.0);
  return from_triplets(points, points, t);
}

TransverseEdges transverse_edges(int points, double h, const BoundaryCondition& bc) {
  std::vector<Trip> g, a;
  std::vector<double> w, x;
  int e = 0;
  if (bc.transverse_low == Face::Dirichlet) {
    g.emplace_back(e, 0, 2.0 / h);
    w.push_back(0.5);
    x.push_back(0.0);
    ++e;
  }
  for (int j = 0; j + 1 < points; ++j, ++e) {
    g.emplace_back(e, j, -1.0 / h);
    g.emplace_back(e, j + 1, 1.0 / h);
    a.emplace_back(e, j, 0.5);
    a.emplace_back(e, j + 1, 0.5);
    w.push_back(1.0);
    x.push_back((j + 1) * h);
  }
  if (bc.transverse_high == Face::Dirichlet) {
    g.emplace_back(e, points - 1, -2.0 / h);
    w.push_back(0.5);
    x.push_back(points * h);
    ++e;
  }
  TransverseEdges out;
  out.diff = from_triplets(e, points, g);
  out.average = from_triplets(e, points, a);
  out.weights = Eigen::Map<RVec>(w.data(), static_cast<Eigen::Index>(w.size()));
  out.coords = Eigen::Map<RVec>(x.data(), static_cast<Eigen::Index>(x.size()));
  return out;
}

RSpMat transverse_laplacian(int points, double h, const BoundaryCondition& bc) {
  const auto e = transverse_edges(points, h, bc);
  RSpMat lap = e.diff.transpose() * diag(e.weights) * e.diff;
  if (lap.rows() == 0 || lap.nonZeros() == 0) lap = RSpMat(points, points);
  lap = RSpMat(0.5 * (lap + RSpMat(lap.transpose())));
  lap.makeCompressed();
  return lap;
}

RSpMat forward_difference_1d(int points, double h) {
  std::vector<Trip> t;
  for (int i = 0; i + 1 < points; ++i) {
    t.emplace_back(i, i, -1.0 / h);
    t.emplace_back(i, i + 1, 1.0 / h);
  }
  return from_triplets(points - 1, points, t);
}

RSpMat centered_difference_1d(int points, double h) {
  std::vector<Trip> t;
  for (int i = 0; i + 1 < points; ++i) {
    t.emplace_back(i, i + 1, 0.5 / h);
    t.emplace_back(i + 1, i, -0.5 / h);
  }
  return from_triplets(points, points, t);
}

RSpMat identity(int n) {
  RSpMat m(n, n);
  m.setIdentity();
  return m;
}

RSpMat kron(const RSpMat& a, const RSpMat& b) {
  RSpMat out = Eigen::kroneckerProduct(a, b);
  out.makeCompressed();
  return out;
}

RSpMat along_axis(const RSpMat& op, int axis, int n, int extent) {
  RSpMat out = identity(1);
  for (int a = 0; a < n; ++a) out = kron(out, a == axis ? op : identity(extent));
  return out;
}

RSpMat tensor(const RSpMat& longitudinal, const RSpMat& transverse) {
  return kron(longitudinal, transverse);
}

RSpMat diag(const RVec& v) {
  std::vector<Trip> t;
  t.reserve(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) t.emplace_back(i, i, v[i]);
  return from_triplets(static_cast<int>(v.size()), static_cast<int>(v.size()), t);
}

SpMat to_complex(const RSpMat& m) { return m.cast<cplx>(); }

}  // namespace specband::stencil
