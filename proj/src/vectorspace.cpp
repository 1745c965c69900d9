#include "rescycle/vectorspace.hpp"

#include "rescycle/error.hpp"

#include <string>

namespace rescycle {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::not_in_range: return "NotInRange";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::not_a_fixed_point: return "NotAFixedPoint";
    case ErrorCode::sample_not_in_fi: return "SampleNotInFi";
    case ErrorCode::cycle_invalid: return "CycleInvalid";
    case ErrorCode::singular_sum: return "SingularSum";
    case ErrorCode::singular_factor: return "SingularFactor";
    case ErrorCode::no_fixed_point: return "NoFixedPoint";
    case ErrorCode::empty_grid_intersection: return "EmptyGridIntersection";
    case ErrorCode::inconsistent_system: return "InconsistentSystem";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::validation_error: return "ValidationError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    fail(ErrorCode::invalid_argument, std::string(what) + ": non-finite coordinate");
  }
}

ProductPoint::ProductPoint(std::size_t blocks, std::size_t dim)
    : blocks_(blocks), dim_(dim), flat_(Vector::Zero(static_cast<Eigen::Index>(blocks * dim))) {
  if (blocks < 2) fail(ErrorCode::invalid_argument, "product point needs m >= 2 blocks");
  if (dim < 1) fail(ErrorCode::invalid_argument, "product point needs dimension n >= 1");
}

ProductPoint ProductPoint::from_blocks(std::span<const Vector> blocks) {
  if (blocks.empty()) fail(ErrorCode::invalid_argument, "product point needs m >= 2 blocks");
  const auto n = static_cast<std::size_t>(blocks.front().size());
  ProductPoint p(blocks.size(), n);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (static_cast<std::size_t>(blocks[i].size()) != n) {
      fail(ErrorCode::dimension_mismatch,
           "block " + std::to_string(i) + " has dimension " + std::to_string(blocks[i].size()) +
               ", expected " + std::to_string(n));
    }
    require_finite(blocks[i], "product point block");
    p.block(i) = blocks[i];
  }
  return p;
}

ProductPoint ProductPoint::from_flat(Vector flat, std::size_t blocks) {
  if (blocks < 2) fail(ErrorCode::invalid_argument, "product point needs m >= 2 blocks");
  const auto total = static_cast<std::size_t>(flat.size());
  if (total == 0 || total % blocks != 0) {
    fail(ErrorCode::dimension_mismatch, "flat length is not a positive multiple of m");
  }
  require_finite(flat, "product point");
  ProductPoint p(blocks, total / blocks);
  p.flat_ = std::move(flat);
  return p;
}

ProductPoint ProductPoint::diagonal(const Vector& v, std::size_t blocks) {
  require_finite(v, "diagonal block");
  ProductPoint p(blocks, static_cast<std::size_t>(v.size()));
  for (std::size_t i = 0; i < blocks; ++i) p.block(i) = v;
  return p;
}

Vector ProductPoint::block_mod(std::ptrdiff_t i) const {
  const auto m = static_cast<std::ptrdiff_t>(blocks_);
  return block(static_cast<std::size_t>(((i % m) + m) % m));
}

double ProductPoint::dot(const ProductPoint& other) const {
  if (!same_shape(other)) fail(ErrorCode::dimension_mismatch, "dot: shape mismatch");
  return flat_.dot(other.flat_);
}

Vector ProductPoint::block_sum() const {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < blocks_; ++i) s += block(i);
  return s;
}

Vector ProductPoint::block_mean() const { return block_sum() / static_cast<double>(blocks_); }

std::vector<Vector> ProductPoint::to_blocks() const {
  std::vector<Vector> out;
  out.reserve(blocks_);
  for (std::size_t i = 0; i < blocks_; ++i) out.emplace_back(block(i));
  return out;
}

ProductPoint& ProductPoint::operator+=(const ProductPoint& other) {
  if (!same_shape(other)) fail(ErrorCode::dimension_mismatch, "addition: shape mismatch");
  flat_ += other.flat_;
  return *this;
}

ProductPoint& ProductPoint::operator-=(const ProductPoint& other) {
  if (!same_shape(other)) fail(ErrorCode::dimension_mismatch, "subtraction: shape mismatch");
  flat_ -= other.flat_;
  return *this;
}

ProductPoint& ProductPoint::operator*=(double s) {
  flat_ *= s;
  return *this;
}

double distance(const ProductPoint& a, const ProductPoint& b) {
  if (!a.same_shape(b)) fail(ErrorCode::dimension_mismatch, "distance: shape mismatch");
  return (a.flat() - b.flat()).norm();
}

ProductPoint shift(const ProductPoint& x) {
  const std::size_t m = x.blocks();
  ProductPoint out(m, x.dim());
  out.block(0) = x.block(m - 1);
  for (std::size_t i = 1; i < m; ++i) out.block(i) = x.block(i - 1);
  return out;
}

ProductPoint unshift(const ProductPoint& x) {
  const std::size_t m = x.blocks();
  ProductPoint out(m, x.dim());
  for (std::size_t i = 0; i + 1 < m; ++i) out.block(i) = x.block(i + 1);
  out.block(m - 1) = x.block(0);
  return out;
}

ProductPoint displacement(const ProductPoint& x) { return x - shift(x); }

ProductPoint project_diagonal(const ProductPoint& x) {
  return ProductPoint::diagonal(x.block_mean(), x.blocks());
}

DisplacementSolution solve_displacement(const ProductPoint& y, double tol) {
  const double residual = y.block_sum().norm();
  if (!(residual <= tol)) {
    fail(ErrorCode::not_in_range,
         "right-hand side has block-sum norm " + std::to_string(residual) +
             " > tol; it is not in the range of Id - R");
  }
  // x_0 = 0, x_i = x_{i-1} + y_i; the wrap equation x_0 - x_{m-1} = y_0
  // holds because the blocks of y sum to zero.
  ProductPoint x(y.blocks(), y.dim());
  for (std::size_t i = 1; i < y.blocks(); ++i) x.block(i) = x.block(i - 1) + y.block(i);
  x -= project_diagonal(x);
  return DisplacementSolution{std::move(x)};
}

}  // namespace rescycle
