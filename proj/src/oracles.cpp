#include "rescycle/oracles.hpp"

#include "rescycle/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rescycle::oracle {

namespace {

struct AffineData {
  Matrix matrix;
  Vector offset;
};

AffineData affine_data(const ResolventOperator& op, std::size_t index) {
  if (const auto* p = std::get_if<AffineParams>(&op.params())) return {p->matrix, p->offset};
  if (std::holds_alternative<ZeroParams>(op.params())) {
    const auto n = static_cast<Eigen::Index>(op.dim());
    return {Matrix::Zero(n, n), Vector::Zero(n)};
  }
  fail(ErrorCode::invalid_argument,
       "factor " + std::to_string(index) + " is not affine (" + to_string(op.kind()) + ")");
}

Eigen::Index at(std::size_t block, std::size_t dim) {
  return static_cast<Eigen::Index>(block * dim);
}

struct MemberVisitor {
  Vector operator()(const BallParams& p) const { return p.center; }
  Vector operator()(const BoxParams& p) const { return 0.5 * (p.lower + p.upper); }
  Vector operator()(const HalfspaceParams& p) const {
    return (p.bound / p.normal.squaredNorm()) * p.normal;
  }
  Vector operator()(const auto&) const {
    fail(ErrorCode::invalid_argument, "grid oracle supports ball, box and halfspace only");
  }
};

// A point known to lie in the set, used to bound the grid search.
Vector known_member(const ResolventOperator& set) { return std::visit(MemberVisitor{}, set.params()); }

struct ContainsVisitor {
  const Vector& v;
  bool operator()(const BallParams& p) const { return (v - p.center).norm() <= p.radius; }
  bool operator()(const BoxParams& p) const {
    return (v.array() >= p.lower.array()).all() && (v.array() <= p.upper.array()).all();
  }
  bool operator()(const HalfspaceParams& p) const { return p.normal.dot(v) <= p.bound; }
  bool operator()(const auto&) const { return false; }
};

bool contains(const ResolventOperator& set, const Vector& v) {
  return std::visit(ContainsVisitor{v}, set.params());
}

struct GridSearch {
  const ResolventOperator& set;
  const Vector& x;
  double h;
  Vector candidate;
  Vector best_point;
  double best_sq;
  bool found = false;

  // Visits grid values of coordinate d in order of increasing distance from
  // x_d and prunes once the partial squared distance reaches the best.
  void search(Eigen::Index d, double partial_sq) {
    if (d == x.size()) {
      if (contains(set, candidate)) {
        best_sq = partial_sq;
        best_point = candidate;
        found = true;
      }
      return;
    }
    const double centre = std::round(x[d] / h);
    auto offset_sq = [&](double g) {
      const double delta = g * h - x[d];
      return delta * delta;
    };
    double up = centre;
    double down = centre - 1.0;
    bool up_open = true;
    bool down_open = true;
    while (up_open || down_open) {
      bool take_up = up_open && (!down_open || offset_sq(up) <= offset_sq(down));
      const double g = take_up ? up : down;
      const double sq = partial_sq + offset_sq(g);
      if (sq >= best_sq) {
        if (take_up) {
          up_open = false;
        } else {
          down_open = false;
        }
        continue;
      }
      candidate[d] = g * h;
      search(d + 1, sq);
      if (take_up) {
        up += 1.0;
      } else {
        down -= 1.0;
      }
    }
  }
};

}  // namespace

ProductPoint DenseMap::apply(const ProductPoint& x) const {
  return ProductPoint::from_flat(matrix * x.flat() + offset, x.blocks());
}

Matrix shift_matrix(std::size_t blocks, std::size_t dim) {
  const auto size = at(blocks, dim);
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix s = Matrix::Zero(size, size);
  for (std::size_t i = 0; i < blocks; ++i) {
    const std::size_t prev = (i + blocks - 1) % blocks;
    s.block(at(i, dim), at(prev, dim), n, n) = Matrix::Identity(n, n);
  }
  return s;
}

DenseMap composed_map(const ProductOperator& op) {
  const std::size_t m = op.blocks();
  const std::size_t dim = op.dim();
  const auto n = static_cast<Eigen::Index>(dim);
  DenseMap map{Matrix::Zero(at(m, dim), at(m, dim)), Vector::Zero(at(m, dim))};
  for (std::size_t i = 0; i < m; ++i) {
    const AffineData a = affine_data(op.factor(i), i);
    const Matrix inv = Eigen::FullPivLU<Matrix>(Matrix::Identity(n, n) + a.matrix).inverse();
    const std::size_t prev = (i + m - 1) % m;
    map.matrix.block(at(i, dim), at(prev, dim), n, n) = inv;
    map.offset.segment(at(i, dim), n) = -(inv * a.offset);
  }
  return map;
}

AffineCycleResult affine_cycle_oracle(const ProductOperator& op) {
  const std::size_t m = op.blocks();
  const std::size_t dim = op.dim();
  const auto n = static_cast<Eigen::Index>(dim);
  const auto size = at(m, dim);
  Matrix system = Matrix::Zero(size, size);
  Vector rhs(size);
  for (std::size_t i = 0; i < m; ++i) {
    const AffineData a = affine_data(op.factor(i), i);
    const std::size_t prev = (i + m - 1) % m;
    system.block(at(i, dim), at(i, dim), n, n) = Matrix::Identity(n, n) + a.matrix;
    system.block(at(i, dim), at(prev, dim), n, n) -= Matrix::Identity(n, n);
    rhs.segment(at(i, dim), n) = -a.offset;
  }

  Eigen::JacobiSVD<Matrix> svd(system, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double threshold = 1e-10 * sigma[0];
  svd.setThreshold(1e-10);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k) rank += sigma[k] > threshold ? 1 : 0;

  const Vector solution = svd.solve(rhs);
  const double mismatch = (system * solution - rhs).norm();

  AffineCycleResult result;
  if (mismatch > 1e-9 * std::max(1.0, rhs.norm())) {
    result.kind = AffineCycleResult::Kind::none;
    return result;
  }
  result.point = ProductPoint::from_flat(solution, m);
  if (rank == size) {
    result.kind = AffineCycleResult::Kind::unique;
    result.kernel = Matrix(size, 0);
  } else {
    result.kind = AffineCycleResult::Kind::affine_subspace;
    result.kernel = svd.matrixV().rightCols(size - rank);
  }
  return result;
}

Vector projection_grid(const ResolventOperator& set, const Vector& x, double h) {
  if (set.dim() > 3) fail(ErrorCode::invalid_argument, "grid oracle is limited to n <= 3");
  if (!(h > 0.0)) fail(ErrorCode::invalid_argument, "grid step must be positive");
  if (static_cast<std::size_t>(x.size()) != set.dim()) {
    fail(ErrorCode::dimension_mismatch, "grid oracle input dimension mismatch");
  }
  const Vector member = known_member(set);
  const double bound =
      (x - member).norm() + 2.0 * h * std::sqrt(static_cast<double>(set.dim()));

  GridSearch search{set, x, h, Vector::Zero(x.size()), Vector(), bound * bound};
  search.search(0, 0.0);
  if (!search.found) {
    fail(ErrorCode::empty_grid_intersection, "no grid point of the set inside the search window");
  }
  return search.best_point;
}

ProductPoint displacement_lsq(const ProductPoint& y) {
  const std::size_t m = y.blocks();
  const std::size_t dim = y.dim();
  const auto size = at(m, dim);
  const auto n = static_cast<Eigen::Index>(dim);
  const Matrix d = Matrix::Identity(size, size) - shift_matrix(m, dim);

  // Projector onto the diagonal (kernel of d): (1/m) * ones(m, m) (x) I_n.
  Matrix diag_projector = Matrix::Zero(size, size);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      diag_projector.block(at(i, dim), at(j, dim), n, n) =
          Matrix::Identity(n, n) / static_cast<double>(m);

  const Matrix normal = d.transpose() * d + diag_projector;
  const Vector x = normal.llt().solve(d.transpose() * y.flat());
  const double mismatch = (d * x - y.flat()).norm();
  if (mismatch > 1e-9 * std::max(1.0, y.norm())) {
    fail(ErrorCode::inconsistent_system,
         "right-hand side is not in the range of Id - R (mismatch " + std::to_string(mismatch) + ")");
  }
  return ProductPoint::from_flat(x, m);
}

}  // namespace rescycle::oracle
