#include "specband/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace specband {

const char* to_string(Face f) { return f == Face::Dirichlet ? "dirichlet" : "neumann"; }

Face face_from_string(const std::string& s) {
  if (s == "dirichlet" || s == "Dirichlet") return Face::Dirichlet;
  if (s == "neumann" || s == "Neumann") return Face::Neumann;
  throw DomainError("unknown boundary condition '" + s + "'");
}

void BoxSpec::validate() const {
  if (n < 1) throw DomainError("n must be >= 1");
  if (N < 1) throw DomainError("N must be >= 1");
  if (p_long < 2) throw DomainError("p_long must be >= 2");
  if (m_trans < 1) throw DomainError("m_trans must be >= 1");
  if (!(d > 0)) throw DomainError("d must be positive");
  if (!alpha.empty() && static_cast<int>(alpha.size()) != n)
    throw DomainError("alpha must have n entries");
}

namespace {

int ipow(int base, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Decompose a flat row-major index over `extent`^n.
std::vector<int> unflatten(int flat, int extent, int n) {
  std::vector<int> out(n);
  for (int a = n - 1; a >= 0; --a) {
    out[a] = flat % extent;
    flat /= extent;
  }
  return out;
}

}  // namespace

Grid::Grid(BoxSpec spec, BoundaryCondition bc) : spec_(std::move(spec)), bc_(bc) {
  spec_.validate();
  if (spec_.alpha.empty()) spec_.alpha.assign(spec_.n, 0);
  if (spec_.whole_space() && (bc_.transverse_low == Face::Dirichlet ||
                              bc_.transverse_high == Face::Dirichlet))
    throw DomainError("whole-space mode (m_trans = 1) has no transverse boundary; "
                      "Dirichlet transverse conditions are not allowed");
  const int n = spec_.n;
  const int L = points_per_side();
  const int p = spec_.p_long;
  const int m = spec_.m_trans;
  long_points_ = ipow(L, n);
  cell_count_ = ipow(spec_.N, n);
  points_per_cell_ = ipow(p, n) * m;
  h_long_ = 1.0 / p;
  h_trans_ = spec_.d / m;
  weight_ = std::pow(h_long_, n) * h_trans_;

  cell_points_.resize(static_cast<size_t>(cell_count_) * points_per_cell_);
  owner_.assign(dim(), -1);
  const int local_long = ipow(p, n);
  for (int k = 0; k < cell_count_; ++k) {
    const auto c = unflatten(k, spec_.N, n);
    for (int ll = 0; ll < local_long; ++ll) {
      const auto li = unflatten(ll, p, n);
      int flat = 0;
      for (int a = 0; a < n; ++a) flat = flat * L + (c[a] * p + li[a]);
      for (int j = 0; j < m; ++j) {
        const int g = flat * m + j;
        cell_points_[static_cast<size_t>(k) * points_per_cell_ + ll * m + j] = g;
        owner_[g] = k;
      }
    }
  }
}

double Grid::volume() const { return std::pow(static_cast<double>(spec_.N), spec_.n) * spec_.d; }

std::vector<double> Grid::point(int global) const {
  const int m = spec_.m_trans;
  const auto li = unflatten(global / m, points_per_side(), spec_.n);
  std::vector<double> x(spec_.n + 1);
  for (int a = 0; a < spec_.n; ++a) x[a] = spec_.alpha[a] + long_coord(li[a]);
  x[spec_.n] = trans_coord(global % m);
  return x;
}

std::vector<double> Grid::local_point(int global) const {
  const int m = spec_.m_trans;
  const auto li = unflatten(global / m, points_per_side(), spec_.n);
  std::vector<double> x(spec_.n + 1);
  for (int a = 0; a < spec_.n; ++a) x[a] = long_coord(li[a] % spec_.p_long);
  x[spec_.n] = trans_coord(global % m);
  return x;
}

std::vector<int> Grid::cell_coords(int k) const {
  if (k < 0 || k >= cell_count_) throw DomainError("cell index outside the box");
  return unflatten(k, spec_.N, spec_.n);
}

int Grid::cell_index(std::span<const int> coords) const {
  if (static_cast<int>(coords.size()) != spec_.n) throw DomainError("cell coordinate rank mismatch");
  int k = 0;
  for (int c : coords) {
    if (c < 0 || c >= spec_.N) throw DomainError("cell coordinate outside the box");
    k = k * spec_.N + c;
  }
  return k;
}

std::span<const int> Grid::cell_points(int k) const {
  if (k < 0 || k >= cell_count_) throw DomainError("cell index outside the box");
  return {cell_points_.data() + static_cast<size_t>(k) * points_per_cell_,
          static_cast<size_t>(points_per_cell_)};
}

bool Grid::contains(const SubBox& b) const {
  if (static_cast<int>(b.corner.size()) != spec_.n || b.size < 1) return false;
  for (int c : b.corner)
    if (c < 0 || c + b.size > spec_.N) return false;
  return true;
}

std::vector<int> Grid::box_points(const SubBox& b) const {
  if (!contains(b)) throw DomainError("sub-box outside the parent box");
  std::vector<int> out;
  for (int k = 0; k < cell_count_; ++k) {
    const auto c = cell_coords(k);
    bool inside = true;
    for (int a = 0; a < spec_.n; ++a)
      inside = inside && c[a] >= b.corner[a] && c[a] < b.corner[a] + b.size;
    if (inside) {
      auto pts = cell_points(k);
      out.insert(out.end(), pts.begin(), pts.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Grid Grid::cell_grid() const {
  BoxSpec s = spec_;
  s.N = 1;
  s.alpha.assign(s.n, 0);
  return Grid(s, bc_);
}

nlohmann::json Grid::summary() const {
  return {{"n", spec_.n},
          {"N", spec_.N},
          {"alpha", spec_.alpha},
          {"d", spec_.d},
          {"p_long", spec_.p_long},
          {"m_trans", spec_.m_trans},
          {"whole_space", spec_.whole_space()},
          {"bc_low", to_string(bc_.transverse_low)},
          {"bc_high", to_string(bc_.transverse_high)},
          {"points", dim()},
          {"cells", cell_count_},
          {"h_long", h_long_},
          {"h_trans", h_trans_}};
}

Grid build_grid(const BoxSpec& spec, const BoundaryCondition& bc) { return Grid(spec, bc); }

double box_distance(const Grid& grid, const SubBox& b1, const SubBox& b2) {
  if (!grid.contains(b1) || !grid.contains(b2)) throw DomainError("sub-box outside the parent box");
  double s = 0;
  for (int a = 0; a < grid.n(); ++a) {
    const double lo1 = b1.corner[a], hi1 = lo1 + b1.size;
    const double lo2 = b2.corner[a], hi2 = lo2 + b2.size;
    const double gap = std::max({0.0, lo2 - hi1, lo1 - hi2});
    s += gap * gap;
  }
  return std::sqrt(s);
}

}  // namespace specband
