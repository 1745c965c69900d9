#include "rescycle/operators.hpp"

#include "rescycle/error.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace rescycle {

namespace {

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::invalid_argument, "resolvent parameter lambda must be positive and finite");
  }
}

void require_dim(const Vector& x, std::size_t n) {
  if (static_cast<std::size_t>(x.size()) != n) {
    fail(ErrorCode::dimension_mismatch, "resolvent input has dimension " +
                                            std::to_string(x.size()) + ", operator has " +
                                            std::to_string(n));
  }
}

// LU of I + lambda*M. Singular when the reciprocal condition estimate drops
// below n * machine epsilon.
struct AffineFactor {
  double lambda;
  Eigen::PartialPivLU<Matrix> lu;
};

AffineFactor factor_affine(const Matrix& m, double lambda) {
  const auto n = m.rows();
  Matrix system = Matrix::Identity(n, n) + lambda * m;
  AffineFactor f{lambda, Eigen::PartialPivLU<Matrix>(system)};
  const double threshold = static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  if (!(f.lu.rcond() > threshold)) {
    fail(ErrorCode::singular_system, "I + lambda*M is numerically singular (lambda = " +
                                         std::to_string(lambda) + ")");
  }
  return f;
}

}  // namespace

const char* to_string(OperatorKind kind) noexcept {
  switch (kind) {
    case OperatorKind::zero: return "zero";
    case OperatorKind::affine: return "affine";
    case OperatorKind::ball: return "ball";
    case OperatorKind::box: return "box";
    case OperatorKind::halfspace: return "halfspace";
    case OperatorKind::affine_set: return "affine_set";
    case OperatorKind::inverse_of: return "inverse";
    case OperatorKind::ovee_of: return "ovee";
  }
  return "unknown";
}

struct ResolventOperator::Impl {
  OperatorParams params;
  std::size_t dim = 0;
  // Affine kinds pre-factor the two resolvent parameters the solvers use.
  std::optional<AffineFactor> at_one;
  std::optional<AffineFactor> at_half;
};

ResolventOperator::ResolventOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

ResolventOperator ResolventOperator::zero(std::size_t dim) {
  if (dim < 1) fail(ErrorCode::invalid_argument, "operator dimension must be >= 1");
  auto impl = std::make_shared<Impl>();
  impl->params = ZeroParams{dim};
  impl->dim = dim;
  return ResolventOperator(std::move(impl));
}

ResolventOperator ResolventOperator::affine(Matrix matrix, Vector offset) {
  const auto n = offset.size();
  if (n < 1) fail(ErrorCode::invalid_argument, "affine offset must have dimension >= 1");
  if (matrix.rows() != n || matrix.cols() != n) {
    fail(ErrorCode::dimension_mismatch, "affine matrix must be n x n with n = offset dimension");
  }
  require_finite(offset, "affine offset");
  if (!matrix.allFinite()) fail(ErrorCode::invalid_argument, "affine matrix: non-finite entry");

  const Matrix sym = matrix + matrix.transpose();
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  const double scale = std::max(1.0, matrix.norm());
  if (min_eig < -1e-10 * scale) {
    fail(ErrorCode::invalid_argument,
         "affine matrix is not monotone: M + M^T has eigenvalue " + std::to_string(min_eig));
  }

  auto impl = std::make_shared<Impl>();
  impl->dim = static_cast<std::size_t>(n);
  impl->at_one = factor_affine(matrix, 1.0);
  impl->at_half = factor_affine(matrix, 0.5);
  impl->params = AffineParams{std::move(matrix), std::move(offset)};
  return ResolventOperator(std::move(impl));
}

ResolventOperator ResolventOperator::ball(Vector center, double radius) {
  if (center.size() < 1) fail(ErrorCode::invalid_argument, "ball center must have dimension >= 1");
  require_finite(center, "ball center");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    fail(ErrorCode::invalid_argument, "ball radius must be finite and >= 0");
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = static_cast<std::size_t>(center.size());
  impl->params = BallParams{std::move(center), radius};
  return ResolventOperator(std::move(impl));
}

ResolventOperator ResolventOperator::box(Vector lower, Vector upper) {
  if (lower.size() < 1) fail(ErrorCode::invalid_argument, "box must have dimension >= 1");
  if (lower.size() != upper.size()) {
    fail(ErrorCode::dimension_mismatch, "box bounds differ in dimension");
  }
  require_finite(lower, "box lower bound");
  require_finite(upper, "box upper bound");
  if ((lower.array() > upper.array()).any()) {
    fail(ErrorCode::invalid_argument, "box lower bound exceeds upper bound");
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = static_cast<std::size_t>(lower.size());
  impl->params = BoxParams{std::move(lower), std::move(upper)};
  return ResolventOperator(std::move(impl));
}

ResolventOperator ResolventOperator::halfspace(Vector normal, double bound) {
  if (normal.size() < 1) fail(ErrorCode::invalid_argument, "halfspace must have dimension >= 1");
  require_finite(normal, "halfspace normal");
  if (!std::isfinite(bound)) fail(ErrorCode::invalid_argument, "halfspace bound must be finite");
  if (!(normal.norm() > 0.0)) fail(ErrorCode::invalid_argument, "halfspace normal must be nonzero");
  auto impl = std::make_shared<Impl>();
  impl->dim = static_cast<std::size_t>(normal.size());
  impl->params = HalfspaceParams{std::move(normal), bound};
  return ResolventOperator(std::move(impl));
}

ResolventOperator ResolventOperator::affine_set(Vector point, Matrix basis) {
  const auto n = point.size();
  if (n < 1) fail(ErrorCode::invalid_argument, "affine set must have dimension >= 1");
  require_finite(point, "affine set point");
  if (basis.cols() > 0 && basis.rows() != n) {
    fail(ErrorCode::dimension_mismatch, "affine set basis vectors must have dimension n");
  }
  if (!basis.allFinite()) fail(ErrorCode::invalid_argument, "affine set basis: non-finite entry");

  Matrix orthonormal(n, 0);
  if (basis.cols() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(basis);
    qr.setThreshold(1e-12);
    const auto rank = qr.rank();
    Matrix q = qr.householderQ() * Matrix::Identity(n, rank);
    orthonormal = std::move(q);
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = static_cast<std::size_t>(n);
  impl->params = AffineSetParams{std::move(point), std::move(basis), std::move(orthonormal)};
  return ResolventOperator(std::move(impl));
}

ResolventOperator inverse(const ResolventOperator& op) {
  auto impl = std::make_shared<ResolventOperator::Impl>();
  impl->dim = op.dim();
  impl->params = InverseParams{std::make_shared<const ResolventOperator>(op)};
  return ResolventOperator(std::move(impl));
}

ResolventOperator ovee(const ResolventOperator& op) {
  auto impl = std::make_shared<ResolventOperator::Impl>();
  impl->dim = op.dim();
  impl->params = OveeParams{std::make_shared<const ResolventOperator>(op)};
  return ResolventOperator(std::move(impl));
}

OperatorKind ResolventOperator::kind() const noexcept {
  return static_cast<OperatorKind>(impl_->params.index());
}

std::size_t ResolventOperator::dim() const noexcept { return impl_->dim; }

const OperatorParams& ResolventOperator::params() const noexcept { return impl_->params; }

bool ResolventOperator::is_normal_cone() const noexcept {
  switch (kind()) {
    case OperatorKind::ball:
    case OperatorKind::box:
    case OperatorKind::halfspace:
    case OperatorKind::affine_set:
      return true;
    case OperatorKind::ovee_of:
      return std::get<OveeParams>(impl_->params).inner->is_normal_cone();
    default:
      return false;
  }
}

Vector ResolventOperator::resolve(const Vector& x, double lambda) const {
  require_lambda(lambda);
  require_dim(x, impl_->dim);
  const Impl& impl = *impl_;

  struct Visitor {
    const Impl& impl;
    const Vector& x;
    double lambda;

    Vector operator()(const ZeroParams&) const { return x; }

    Vector operator()(const AffineParams& p) const {
      const Vector rhs = x - lambda * p.offset;
      if (impl.at_one && lambda == impl.at_one->lambda) return impl.at_one->lu.solve(rhs);
      if (impl.at_half && lambda == impl.at_half->lambda) return impl.at_half->lu.solve(rhs);
      return factor_affine(p.matrix, lambda).lu.solve(rhs);
    }

    Vector operator()(const BallParams& p) const {
      const Vector d = x - p.center;
      const double dist = d.norm();
      if (dist <= p.radius) return x;
      return p.center + (p.radius / dist) * d;
    }

    Vector operator()(const BoxParams& p) const {
      return x.cwiseMax(p.lower).cwiseMin(p.upper);
    }

    Vector operator()(const HalfspaceParams& p) const {
      const double excess = p.normal.dot(x) - p.bound;
      if (excess <= 0.0) return x;
      return x - (excess / p.normal.squaredNorm()) * p.normal;
    }

    Vector operator()(const AffineSetParams& p) const {
      const Vector d = x - p.point;
      return p.point + p.orthonormal * (p.orthonormal.transpose() * d);
    }

    Vector operator()(const InverseParams& p) const {
      return x - lambda * p.inner->resolve(x / lambda, 1.0 / lambda);
    }

    Vector operator()(const OveeParams& p) const { return -p.inner->resolve(-x, lambda); }
  };

  return std::visit(Visitor{impl, x, lambda}, impl.params);
}

std::string ResolventOperator::describe() const {
  std::ostringstream os;
  switch (kind()) {
    case OperatorKind::inverse_of:
      os << "inverse(" << std::get<InverseParams>(impl_->params).inner->describe() << ")";
      break;
    case OperatorKind::ovee_of:
      os << "ovee(" << std::get<OveeParams>(impl_->params).inner->describe() << ")";
      break;
    default:
      os << to_string(kind()) << "[n=" << dim() << "]";
  }
  return os.str();
}

ProductOperator::ProductOperator(std::vector<ResolventOperator> factors)
    : factors_(std::move(factors)), dim_(0) {
  if (factors_.size() < 2) fail(ErrorCode::invalid_argument, "product operator needs m >= 2 factors");
  dim_ = factors_.front().dim();
  for (std::size_t i = 1; i < factors_.size(); ++i) {
    if (factors_[i].dim() != dim_) {
      fail(ErrorCode::dimension_mismatch, "factor " + std::to_string(i) + " has dimension " +
                                              std::to_string(factors_[i].dim()) + ", expected " +
                                              std::to_string(dim_));
    }
  }
}

const ResolventOperator& ProductOperator::factor_mod(std::ptrdiff_t i) const {
  const auto m = static_cast<std::ptrdiff_t>(factors_.size());
  return factors_[static_cast<std::size_t>(((i % m) + m) % m)];
}

ProductPoint product_resolve(const ProductOperator& op, const ProductPoint& x, double lambda) {
  if (x.blocks() != op.blocks() || x.dim() != op.dim()) {
    fail(ErrorCode::dimension_mismatch, "product point shape does not match product operator");
  }
  ProductPoint out(x.blocks(), x.dim());
  for (std::size_t i = 0; i < x.blocks(); ++i) {
    try {
      out.block(i) = op.factor(i).resolve(x.block(i), lambda);
    } catch (const Error& e) {
      throw Error(e.code(), "block " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rescycle
