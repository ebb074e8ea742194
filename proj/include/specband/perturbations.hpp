#pragma once

#include <functional>
#include <span>
#include <vector>

#include "specband/common.hpp"
#include "specband/geometry.hpp"
#include "specband/operators.hpp"

namespace specband {

/// Real field on the unit cell, evaluated at cell-local coordinates
/// (x1..xn, xt).
using Field = std::function<double(std::span<const double>)>;
/// Complex field on the unit cell.
using CField = std::function<cplx(std::span<const double>)>;
/// (n+1) x (n+1) coefficient matrix; index n is the transverse direction.
/// An empty function stands for the zero coefficient.
using CoefficientMatrix = std::vector<std::vector<CField>>;

/// Nodal samples of `f` on a one-cell grid.
RVec sample_cell(const Grid& cell, const Field& f);

/// Kernel samples K(x, y) over pairs of cell nodes.
Eigen::MatrixXcd sample_kernel(const Grid& cell,
                               const std::function<cplx(std::span<const double>, std::span<const double>)>& k);

/// L(t) = t V1 + t^2 V2 (multiplication operators).
PerturbationFamily potential_family(const Grid& cell, const RVec& v1, const RVec& v2);
PerturbationFamily potential_family(const Grid& cell, const Vec& v1, const Vec& v2);

/// L1 = 2i A.grad + i div A, L2 = |A|^2 in the symmetric form
/// i (A_c D_c + D_c A_c). `a` holds n+1 components.
PerturbationFamily magnetic_family(const Grid& cell, const std::vector<Field>& a);

/// L1 = -sum d_i a_ij d_j, L2 = -sum d_i b_ij d_j in flux form.
PerturbationFamily metric_family(const Grid& cell, const CoefficientMatrix& a, const CoefficientMatrix& b);

/// L_i = w K_i with K_i hermitian kernel samples.
PerturbationFamily integral_family(const Grid& cell, const Eigen::MatrixXcd& k1, const Eigen::MatrixXcd& k2);

/// Boundary wiggling by a profile g(x') supported inside the cell; the
/// straightened operator is the metric family with a_{t,j} = a_{j,t} = -dg/dx_j
/// and b_{tt} = |grad' g|^2. Requires Dirichlet transverse faces.
PerturbationFamily boundary_deformation_family(const Grid& cell, const Field& g);

/// L1 = 0, L3 = 0, L2 given; requires (L2 psi0, psi0) > 0.
PerturbationFamily linear_positive_family(const Grid& cell, const SpMat& l2, const CellSpectrum& cs);

/// Points of the cell closer than one grid spacing to a lateral face.
bool on_lateral_ring(const Grid& cell, std::span<const double> local_point);

}  // namespace specband
