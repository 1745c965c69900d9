#pragma once

// Dense vectors of X = R^n and points of the product space X^m.
//
// A ProductPoint stores its m blocks contiguously, block i occupying
// coordinates [i*n, (i+1)*n). Blocks are 0-indexed in code; block 0 plays
// the role of x_1 in the usual 1-based notation, and x_{-1} wraps to x_{m-1}.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace rescycle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Throws ErrorCode::invalid_argument if any coordinate is NaN or infinite.
void require_finite(const Vector& v, const char* what);

class ProductPoint {
 public:
  /// The zero point with `blocks` blocks of dimension `dim`. Requires
  /// blocks >= 2 and dim >= 1.
  ProductPoint(std::size_t blocks, std::size_t dim);

  static ProductPoint from_blocks(std::span<const Vector> blocks);
  static ProductPoint from_flat(Vector flat, std::size_t blocks);
  /// Every block equal to `v`.
  static ProductPoint diagonal(const Vector& v, std::size_t blocks);

  std::size_t blocks() const noexcept { return blocks_; }
  std::size_t dim() const noexcept { return dim_; }

  auto block(std::size_t i) const {
    return flat_.segment(static_cast<Eigen::Index>(i * dim_),
                         static_cast<Eigen::Index>(dim_));
  }
  auto block(std::size_t i) {
    return flat_.segment(static_cast<Eigen::Index>(i * dim_),
                         static_cast<Eigen::Index>(dim_));
  }
  /// Block i wrapped modulo m (negative indices allowed).
  Vector block_mod(std::ptrdiff_t i) const;

  const Vector& flat() const noexcept { return flat_; }

  double norm() const { return flat_.norm(); }
  double dot(const ProductPoint& other) const;
  /// Sum of all blocks; zero exactly when the point lies in D-perp.
  Vector block_sum() const;
  Vector block_mean() const;
  std::vector<Vector> to_blocks() const;

  bool same_shape(const ProductPoint& other) const noexcept {
    return blocks_ == other.blocks_ && dim_ == other.dim_;
  }

  ProductPoint& operator+=(const ProductPoint& other);
  ProductPoint& operator-=(const ProductPoint& other);
  ProductPoint& operator*=(double s);

  friend ProductPoint operator+(ProductPoint a, const ProductPoint& b) { return a += b; }
  friend ProductPoint operator-(ProductPoint a, const ProductPoint& b) { return a -= b; }
  friend ProductPoint operator*(double s, ProductPoint a) { return a *= s; }
  friend ProductPoint operator*(ProductPoint a, double s) { return a *= s; }
  friend ProductPoint operator-(ProductPoint a) { return a *= -1.0; }

 private:
  std::size_t blocks_;
  std::size_t dim_;
  Vector flat_;
};

double distance(const ProductPoint& a, const ProductPoint& b);

/// Circular right shift R: (x_1, ..., x_m) -> (x_m, x_1, ..., x_{m-1}).
ProductPoint shift(const ProductPoint& x);
/// Inverse of shift.
ProductPoint unshift(const ProductPoint& x);
/// (Id - R) x.
ProductPoint displacement(const ProductPoint& x);
/// Orthogonal projection onto the diagonal {(v, ..., v)}.
ProductPoint project_diagonal(const ProductPoint& x);

/// Solution set of (Id - R) x = y, described by its minimum-norm member.
struct DisplacementSolution {
  enum class Kernel { diagonal };

  ProductPoint particular;
  /// Every solution is `particular` plus a diagonal point.
  Kernel kernel = Kernel::diagonal;
};

/// Minimum-norm x with x_i - x_{i-1} = y_i for all i (indices mod m).
/// Throws ErrorCode::not_in_range when |block_sum(y)| > tol.
DisplacementSolution solve_displacement(const ProductPoint& y, double tol);

}  // namespace rescycle
