#pragma once

#include <functional>
#include <limits>

#include <nlohmann/json.hpp>

#include "specband/common.hpp"
#include "specband/geometry.hpp"
#include "specband/operators.hpp"
#include "specband/perturbations.hpp"

namespace specband {

struct CorrectorResult {
  Vec u;
  int iterations = 0;
  double residual = 0;      // ||(H - L0) U - P rhs|| / ||P rhs||
  double orthogonality = 0; // |(U, psi0)|
  bool rhs_projected = false;
};

struct CellAnalysis {
  double lambda0 = 0;
  double lambda1 = 0;
  double a1_residual = 0;   // (L1 psi0, psi0)
  double a1_tolerance = 0;  // 1e-10 ||L1 psi0|| ||psi0||
  bool a1_ok = false;
  double l2_pairing = 0;    // (L2 psi0, psi0)
  double u_l1_pairing = 0;  // (U, L1 psi0)
  double l1psi_norm2 = 0;   // ||L1 psi0||^2
  double c0 = 0;
  double c0_error = std::numeric_limits<double>::quiet_NaN();
  bool a2_ok = false;
  bool sufficient_ok = false;
  CorrectorResult corrector;

  nlohmann::json to_json() const;
};

/// (L1 psi0, psi0) in the weighted inner product (real for hermitian L1).
double check_a1(const PerturbationFamily& family, const CellSpectrum& cs);
/// Relative tolerance 1e-10 ||L1 psi0|| ||psi0||, floored at rounding level
/// 64 eps ||L1|| ||psi0||^2.
double a1_tolerance(const PerturbationFamily& family, const CellSpectrum& cs);

/// Replace V1 by V1 - (V1 psi0, psi0)/(psi0, psi0). Diagonal L1 only.
PerturbationFamily exactify_a1(const PerturbationFamily& family, const CellSpectrum& cs);

/// Solve (H_cell - L0) U = P rhs with U orthogonal to psi0, by projected CG
/// preconditioned with (H_cell + (1 - L0) I). If rhs has a psi0 component
/// it is removed and the result is flagged.
CorrectorResult solve_corrector(const SparseOperator& cell_op, const CellSpectrum& cs, const Vec& rhs,
                                double tol = 1e-12);

/// c0 = (L2 psi0, psi0) - (U, L1 psi0).
double compute_c0(const PerturbationFamily& family, const CellSpectrum& cs, const Vec& u);

/// (L2 psi0, psi0) > ||L1 psi0||^2 / (L1 - L0).
bool sufficient_condition(const PerturbationFamily& family, const CellSpectrum& cs);

/// Full A1/A2 pipeline on one cell.
CellAnalysis analyze_cell(const PerturbationFamily& family, const Grid& cell, std::span<const double> v0);

/// Whole-space variant: the cell grid must be in whole-space mode, psi0 is
/// the normalized constant and L0 = 0.
CellAnalysis whole_space_analysis(const PerturbationFamily& family, const Grid& cell);

/// c0 at the given resolution and at half of it (p/2, m/2 rounded up);
/// error bar |c0_h - c0_2h| / 3 assuming second-order convergence.
struct TwoGridC0 {
  double c0_fine = 0;
  double c0_coarse = 0;
  double error = 0;
};
TwoGridC0 two_grid_c0(const std::function<PerturbationFamily(const Grid&)>& build, const BoxSpec& cell_spec,
                      const BoundaryCondition& bc, const std::function<double(double)>& v0);

/// Continuum c0 of the boundary-deformation family from its mode expansion
/// (Dirichlet layer, V0 = 0), truncated after M transverse modes. The
/// Neumann problems on the cross-section are solved in a cosine basis.
/// `g` sees cross-section coordinates (x1..xn).
struct SeriesOptions {
  int quadrature_points = 2048;  // per direction, for the cosine coefficients (n = 1)
  int cosine_modes = 512;        // per direction
};
double deformation_c0_series(const std::function<double(std::span<const double>)>& g, int n, double d, int M,
                             SeriesOptions opt = {});
/// Partial sums S_2..S_M of the same series (index 0 is S_2).
std::vector<double> deformation_c0_partial_sums(const std::function<double(std::span<const double>)>& g, int n,
                                                double d, int M, SeriesOptions opt = {});

}  // namespace specband
