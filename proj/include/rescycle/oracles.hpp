#pragma once

// Independent baselines for certifying the solvers on small instances.
// Nothing here calls resolve(), shift() or solve_displacement(); every
// oracle assembles its own dense system or enumerates a grid.

#include "rescycle/operators.hpp"
#include "rescycle/vectorspace.hpp"

#include <optional>

namespace rescycle::oracle {

/// x -> matrix * x + offset on the flattened product space.
struct DenseMap {
  Matrix matrix;
  Vector offset;

  ProductPoint apply(const ProductPoint& x) const;
};

/// Affine form of x -> J_A(R x) for an all-affine product operator:
/// block (i, i-1) is (I + M_i)^{-1}, offset_i = -(I + M_i)^{-1} b_i.
DenseMap composed_map(const ProductOperator& op);

struct AffineCycleResult {
  enum class Kind { unique, none, affine_subspace };

  Kind kind = Kind::none;
  /// A solution (the minimum-norm one for affine_subspace).
  std::optional<ProductPoint> point;
  /// Columns span the solution directions when kind == affine_subspace.
  Matrix kernel;
};

/// Solves (I + M_i) z_i - z_{i-1} = -b_i (z_{-1} = z_{m-1}) densely and
/// classifies the solution set by rank. Throws ErrorCode::invalid_argument
/// for non-affine factors.
AffineCycleResult affine_cycle_oracle(const ProductOperator& op);

/// argmin |v - x| over grid points v in h * Z^n that lie in the set, searched
/// in the ball of radius |x - c| + h*sqrt(n) around x, c a known member of the
/// set. Supports ball, box and halfspace operators with n <= 3. Throws
/// ErrorCode::empty_grid_intersection if no grid point is found and
/// ErrorCode::invalid_argument for unsupported kinds.
Vector projection_grid(const ResolventOperator& set, const Vector& x, double h);

/// Minimum-norm least-squares solution of (I - R_matrix) x = y on the
/// flattened space, via normal equations deflated by the diagonal projector.
/// Throws ErrorCode::inconsistent_system if the residual is not ~0.
ProductPoint displacement_lsq(const ProductPoint& y);

/// Dense (mn x mn) matrix of the right shift.
Matrix shift_matrix(std::size_t blocks, std::size_t dim);

}  // namespace rescycle::oracle
