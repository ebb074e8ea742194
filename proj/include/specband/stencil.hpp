#pragma once

// One-dimensional finite-difference building blocks on cell-centered grids
// and their tensor lifts. Everything here is shared by the unperturbed
// operator and by the differential perturbation families, so both use the
// same stencils.

#include "specband/common.hpp"
#include "specband/geometry.hpp"

namespace specband::stencil {

/// -d^2/dx^2 with mirror (Neumann) ghosts at both ends; rows sum to zero.
RSpMat neumann_laplacian_1d(int points, double h);

/// -d^2/dx^2 on the transverse interval. Dirichlet faces use an
/// antisymmetric ghost (u_{-1} = -u_0), Neumann faces a mirror ghost.
RSpMat transverse_laplacian(int points, double h, const BoundaryCondition& bc);

/// Forward differences on the interior edges: (points-1) x points.
RSpMat forward_difference_1d(int points, double h);

/// Antisymmetric centered difference with zero ghosts.
RSpMat centered_difference_1d(int points, double h);

/// Transverse edge data: difference operator onto edges (boundary half-edges
/// included for Dirichlet faces), edge weights such that
/// transverse_laplacian == G^T diag(weights) G, the node-to-edge averaging
/// operator (zero on Dirichlet half-edges, where u vanishes) and edge
/// coordinates.
struct TransverseEdges {
  RSpMat diff;
  RVec weights;
  RSpMat average;
  RVec coords;
};
TransverseEdges transverse_edges(int points, double h, const BoundaryCondition& bc);

RSpMat identity(int n);
RSpMat kron(const RSpMat& a, const RSpMat& b);

/// I x ... x op x ... x I over n longitudinal axes of `extent` points each;
/// `op` may be rectangular.
RSpMat along_axis(const RSpMat& op, int axis, int n, int extent);

/// Lift a longitudinal operator and a transverse operator to the full grid.
RSpMat tensor(const RSpMat& longitudinal, const RSpMat& transverse);

RSpMat diag(const RVec& v);
SpMat to_complex(const RSpMat& m);

}  // namespace specband::stencil
