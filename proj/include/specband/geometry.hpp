#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "specband/common.hpp"

namespace specband {

enum class Face { Dirichlet, Neumann };

const char* to_string(Face f);
Face face_from_string(const std::string& s);

/// Conditions on the two transverse faces x_t = 0 and x_t = d.
/// Longitudinal faces are always Neumann.
struct BoundaryCondition {
  Face transverse_low = Face::Dirichlet;
  Face transverse_high = Face::Dirichlet;

  bool all_dirichlet() const {
    return transverse_low == Face::Dirichlet && transverse_high == Face::Dirichlet;
  }
  bool operator==(const BoundaryCondition&) const = default;
};

/// A finite segment of the layer: N^n unit cells of width d, each sampled by
/// p_long points per longitudinal edge and m_trans transverse points.
/// m_trans == 1 selects whole-space mode (no transverse direction).
struct BoxSpec {
  int n = 1;
  int N = 1;
  std::vector<int> alpha;  // lattice offset, length n (empty means zero)
  double d = 1.0;
  int p_long = 4;
  int m_trans = 8;

  bool whole_space() const { return m_trans == 1; }
  void validate() const;
  bool operator==(const BoxSpec&) const = default;
};

/// Sub-box Pi_{beta,m}: `size` cells per side starting at cell `corner`
/// (box-relative cell coordinates), full transverse extent.
struct SubBox {
  std::vector<int> corner;
  int size = 1;
  bool operator==(const SubBox&) const = default;
};

/// Cell-centered tensor grid over a box. Points sit at cell midpoints of a
/// uniform mesh, so unit cells own disjoint point sets and every point has
/// the same quadrature weight. Global ordering is longitudinal-major with
/// the transverse index running fastest.
class Grid {
 public:
  Grid(BoxSpec spec, BoundaryCondition bc);

  const BoxSpec& spec() const { return spec_; }
  const BoundaryCondition& bc() const { return bc_; }
  int n() const { return spec_.n; }
  int m_trans() const { return spec_.m_trans; }
  int p_long() const { return spec_.p_long; }

  int points_per_side() const { return spec_.N * spec_.p_long; }
  int long_points() const { return long_points_; }
  int dim() const { return long_points_ * spec_.m_trans; }
  int cell_count() const { return cell_count_; }
  int points_per_cell() const { return points_per_cell_; }

  double h_long() const { return h_long_; }
  double h_trans() const { return h_trans_; }
  double weight() const { return weight_; }
  double volume() const;

  /// Quadrature weights of all points (uniform).
  RVec weights() const { return RVec::Constant(dim(), weight_); }

  double long_coord(int i) const { return (i + 0.5) * h_long_; }
  double trans_coord(int j) const { return (j + 0.5) * h_trans_; }

  /// Coordinates (x_1..x_n, x_t) of a global point; longitudinal values are
  /// absolute (alpha included).
  std::vector<double> point(int global) const;
  /// Same, relative to the owning cell's corner (what cell-local fields see).
  std::vector<double> local_point(int global) const;

  std::vector<int> cell_coords(int k) const;
  int cell_index(std::span<const int> coords) const;

  /// Global indices of cell k's points in cell-local order.
  std::span<const int> cell_points(int k) const;
  int owner_cell(int global) const { return owner_[global]; }

  /// Global indices of all points inside a sub-box.
  std::vector<int> box_points(const SubBox& b) const;
  bool contains(const SubBox& b) const;

  /// The one-cell grid with the same resolution and boundary data.
  Grid cell_grid() const;

  nlohmann::json summary() const;

 private:
  BoxSpec spec_;
  BoundaryCondition bc_;
  int long_points_ = 0;
  int cell_count_ = 0;
  int points_per_cell_ = 0;
  double h_long_ = 0;
  double h_trans_ = 0;
  double weight_ = 0;
  std::vector<int> cell_points_;  // cell_count * points_per_cell
  std::vector<int> owner_;
};

Grid build_grid(const BoxSpec& spec, const BoundaryCondition& bc);

/// Euclidean distance between two closed sub-boxes of `grid`'s box
/// (0 if they touch or overlap). Units are cell widths.
double box_distance(const Grid& grid, const SubBox& b1, const SubBox& b2);

}  // namespace specband
