#pragma once

// Maximally monotone operators on R^n, represented by their resolvents
// J_{lambda A} = (Id + lambda A)^{-1}.

#include "rescycle/vectorspace.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace rescycle {

class ResolventOperator;

struct ZeroParams {
  std::size_t dim;
};

/// A(v) = M v + b with M + M^T positive semidefinite.
struct AffineParams {
  Matrix matrix;
  Vector offset;
};

/// Normal cone of the closed ball; its resolvent is the projection.
struct BallParams {
  Vector center;
  double radius;
};

struct BoxParams {
  Vector lower;
  Vector upper;
};

/// Normal cone of {v : <normal, v> <= bound}.
struct HalfspaceParams {
  Vector normal;
  double bound;
};

/// Normal cone of point + span(basis columns). `orthonormal` spans the same
/// subspace and is derived at construction.
struct AffineSetParams {
  Vector point;
  Matrix basis;
  Matrix orthonormal;
};

struct InverseParams {
  std::shared_ptr<const ResolventOperator> inner;
};

/// B^ovee = (-Id) o B o (-Id).
struct OveeParams {
  std::shared_ptr<const ResolventOperator> inner;
};

using OperatorParams = std::variant<ZeroParams, AffineParams, BallParams, BoxParams,
                                    HalfspaceParams, AffineSetParams, InverseParams, OveeParams>;

enum class OperatorKind { zero, affine, ball, box, halfspace, affine_set, inverse_of, ovee_of };

const char* to_string(OperatorKind kind) noexcept;

class ResolventOperator {
 public:
  static ResolventOperator zero(std::size_t dim);
  /// Throws ErrorCode::invalid_argument if M + M^T has an eigenvalue below
  /// -1e-10 * max(1, |M|).
  static ResolventOperator affine(Matrix matrix, Vector offset);
  static ResolventOperator ball(Vector center, double radius);
  static ResolventOperator box(Vector lower, Vector upper);
  static ResolventOperator halfspace(Vector normal, double bound);
  /// `basis` holds the spanning directions as columns (n x k, k may be 0).
  static ResolventOperator affine_set(Vector point, Matrix basis);

  OperatorKind kind() const noexcept;
  std::size_t dim() const noexcept;
  const OperatorParams& params() const noexcept;

  /// True for kinds whose resolvent is a projection (independent of lambda).
  bool is_normal_cone() const noexcept;

  /// J_{lambda A}(x): the unique y with x in y + lambda A(y).
  Vector resolve(const Vector& x, double lambda = 1.0) const;

  std::string describe() const;

 private:
  struct Impl;
  explicit ResolventOperator(std::shared_ptr<const Impl> impl);

  friend ResolventOperator inverse(const ResolventOperator& op);
  friend ResolventOperator ovee(const ResolventOperator& op);

  std::shared_ptr<const Impl> impl_;
};

/// A^{-1}, through J_{lambda A^{-1}}(x) = x - lambda J_{A/lambda}(x/lambda).
ResolventOperator inverse(const ResolventOperator& op);
/// A^ovee, through J_{lambda A^ovee}(x) = -J_{lambda A}(-x).
ResolventOperator ovee(const ResolventOperator& op);

inline Vector resolve(const ResolventOperator& op, const Vector& x, double lambda = 1.0) {
  return op.resolve(x, lambda);
}

/// A_1 x ... x A_m acting blockwise on X^m.
class ProductOperator {
 public:
  /// Requires m >= 2 factors of a common dimension.
  explicit ProductOperator(std::vector<ResolventOperator> factors);

  std::size_t blocks() const noexcept { return factors_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const ResolventOperator& factor(std::size_t i) const { return factors_.at(i); }
  const std::vector<ResolventOperator>& factors() const noexcept { return factors_; }

  /// Factor index wrapped modulo m.
  const ResolventOperator& factor_mod(std::ptrdiff_t i) const;

 private:
  std::vector<ResolventOperator> factors_;
  std::size_t dim_;
};

/// (J_{lambda A_1} x_1, ..., J_{lambda A_m} x_m). Factor errors are rethrown
/// with the block index in the message.
ProductPoint product_resolve(const ProductOperator& op, const ProductPoint& x, double lambda = 1.0);

}  // namespace rescycle
