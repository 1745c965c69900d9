#pragma once

// Attouch-Thera duality for pairs (A, B) of maximally monotone operators.
//
// Primal problem: find x with 0 in A x + B x.
// Dual problem:   find y with 0 in A^{-1} y - B^{-1}(-y).
//
// Solution sets are computed in closed form for affine pairs only; for the
// cycle problem (A, Id - R) the dual solution is the gap vector of a cycle.

#include "rescycle/cycles.hpp"
#include "rescycle/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rescycle {

/// v -> M v + b, with the transforms used by the dual pair.
class AffineMap {
 public:
  AffineMap(Matrix matrix, Vector offset);
  static AffineMap from_operator(const ResolventOperator& op);

  const Matrix& matrix() const noexcept { return matrix_; }
  const Vector& offset() const noexcept { return offset_; }

  Vector operator()(const Vector& v) const { return matrix_ * v + offset_; }

  /// v -> M^{-1}(v - b). Throws ErrorCode::singular_factor.
  AffineMap inverse() const;
  /// (-Id) o this o (-Id): v -> M v - b.
  AffineMap ovee() const;

 private:
  Matrix matrix_;
  Vector offset_;
};

struct ATPair {
  ResolventOperator a;
  ResolventOperator b;
};

struct RelationCheck {
  std::string id;
  bool pass = false;
  double residual = 0.0;
};

struct DualityReport {
  std::optional<Vector> psol;
  std::optional<Vector> dsol;
  std::vector<RelationCheck> relations;
  double tol = 0.0;

  bool all_pass() const;
};

/// Unique x with (M_A + M_B) x = -(b_A + b_B). Throws ErrorCode::singular_sum
/// when M_A + M_B is singular and ErrorCode::invalid_argument for
/// non-affine operands.
Vector psol_affine(const ResolventOperator& a, const ResolventOperator& b);

/// Unique y with M_A^{-1}(y - b_A) - M_B^{-1}(-y - b_B) = 0. Throws
/// ErrorCode::singular_factor when M_A or M_B is singular.
Vector dsol_affine(const ResolventOperator& a, const ResolventOperator& b);

/// Relations ton1..ton6 between x = psol and y = dsol, each with its
/// residual. Single-valued relations are equalities of affine evaluations;
/// ton1 and ton2 are additionally checked as graph memberships through the
/// resolvents of A, B^ovee, A^{-1} and B^{-1}.
DualityReport verify_singleton_relations(const ResolventOperator& a, const ResolventOperator& b,
                                         double tol);

/// Largest resolvent discrepancy between (A, B) and its double dual
/// (A^{-1}, B^{-ovee})^*, over `probes` random (x, lambda).
double dual_pair_involution_deviation(const ResolventOperator& a, const ResolventOperator& b,
                                      std::size_t probes = 100, std::uint64_t seed = 7);

bool dual_pair_involution(const ResolventOperator& a, const ResolventOperator& b,
                          double tol = 1e-9, std::size_t probes = 100, std::uint64_t seed = 7);

/// The cycle-problem dual checks for (A, Id - R) with y = gap_vector(c):
///   gap_in_graph      y_i in A_i(z_i), via J_i(z_i + y_i) = z_i
///   gap_displacement  y = (Id - R)(-z)
///   gap_in_dperp      block-sum of y is zero
///   primal_preimage   -z lies in (Id - R)^{-1}(y) up to a diagonal point
/// Throws ErrorCode::cycle_invalid if c's composed residual exceeds tol.
DualityReport verify_cycle_duality(const ProductOperator& op, const Cycle& c, double tol = 1e-7);

}  // namespace rescycle
