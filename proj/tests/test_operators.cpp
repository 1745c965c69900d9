#include <doctest.h>

#include "rescycle/error.hpp"
#include "rescycle/operators.hpp"
#include "rescycle/random.hpp"

#include <vector>

using namespace rescycle;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix mat1(double a) { return Matrix::Constant(1, 1, a); }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::io_error;
}

Matrix random_monotone(Rng& rng, std::size_t n) {
  const Matrix g = rng.normal_matrix(n, n);
  const Matrix s = rng.normal_matrix(n, n);
  return g * g.transpose() + 0.1 * Matrix::Identity(n, n) + (s - s.transpose());
}

double firm_slack(const ResolventOperator& op, const Vector& x, const Vector& y, double lambda) {
  const Vector d = op.resolve(x, lambda) - op.resolve(y, lambda);
  return d.dot(x - y) - d.squaredNorm();
}

}  // namespace

TEST_CASE("closed-form resolvents") {
  CHECK(ResolventOperator::zero(2).resolve(vec({3, -4})) == vec({3, -4}));

  const auto half = ResolventOperator::affine(mat1(1), vec({0}));
  CHECK(half.resolve(vec({3}))[0] == doctest::Approx(1.5));
  CHECK(half.resolve(vec({3}), 0.5)[0] == doctest::Approx(2.0));

  const auto ball = ResolventOperator::ball(vec({-2, 0}), 1);
  CHECK((ball.resolve(vec({1, 0})) - vec({-1, 0})).norm() < 1e-15);
  CHECK(ball.resolve(vec({-2.5, 0.5})) == vec({-2.5, 0.5}));
  CHECK(ball.resolve(vec({-2, 0})) == vec({-2, 0}));

  const auto box = ResolventOperator::box(vec({0, 0}), vec({1, 1}));
  CHECK(box.resolve(vec({2, -1})) == vec({1, 0}));

  const auto half_space = ResolventOperator::halfspace(vec({1, 1}), 1);
  CHECK((half_space.resolve(vec({2, 2})) - vec({0.5, 0.5})).norm() < 1e-15);
  CHECK(half_space.resolve(vec({0, 0})) == vec({0, 0}));

  Matrix basis(2, 1);
  basis << 0, 3;
  const auto line = ResolventOperator::affine_set(vec({2, 0}), basis);
  CHECK((line.resolve(vec({-1, 7})) - vec({2, 7})).norm() < 1e-14);
  const auto point = ResolventOperator::affine_set(vec({1, 2}), Matrix(2, 0));
  CHECK(point.resolve(vec({5, 5})) == vec({1, 2}));
}

TEST_CASE("normal-cone resolvents ignore lambda") {
  const auto ball = ResolventOperator::ball(vec({0, 0}), 2);
  CHECK(ball.is_normal_cone());
  CHECK(ball.resolve(vec({4, 3}), 0.1) == ball.resolve(vec({4, 3}), 10.0));
  CHECK_FALSE(ResolventOperator::affine(mat1(1), vec({0})).is_normal_cone());
}

TEST_CASE("affine resolvent solves (I + lambda M) y = x - lambda b") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_monotone(rng, 4);
    const Vector b = rng.normal_vector(4);
    const auto op = ResolventOperator::affine(m, b);
    const Vector x = rng.normal_vector(4);
    for (double lambda : {0.5, 1.0, 2.7}) {
      const Vector y = op.resolve(x, lambda);
      CHECK((y + lambda * (m * y + b) - x).norm() < 1e-10);
    }
  }
}

TEST_CASE("constructor validation") {
  CHECK(code_of([] { ResolventOperator::ball(vec({0, 0}), -1); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { ResolventOperator::box(vec({1}), vec({0})); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { ResolventOperator::halfspace(vec({0, 0}), 1); }) ==
        ErrorCode::invalid_argument);
  CHECK(code_of([] { ResolventOperator::affine(mat1(-1), vec({0})); }) ==
        ErrorCode::invalid_argument);
  CHECK(code_of([] { ResolventOperator::affine(Matrix::Identity(2, 2), vec({0})); }) ==
        ErrorCode::dimension_mismatch);
  CHECK(code_of([] { ResolventOperator::zero(2).resolve(vec({1, 2}), 0.0); }) ==
        ErrorCode::invalid_argument);
  CHECK(code_of([] { ResolventOperator::zero(2).resolve(vec({1})); }) ==
        ErrorCode::dimension_mismatch);

  // A rotation is monotone but not symmetric.
  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  CHECK_NOTHROW(ResolventOperator::affine(rot, vec({0, 0})));
}

TEST_CASE("inverse resolvent identity: J_A + J_{A^-1} = Id") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_monotone(rng, 3);
    const auto op = ResolventOperator::affine(m, rng.normal_vector(3));
    const auto inv = inverse(op);
    const Vector x = rng.normal_vector(3);
    CHECK((op.resolve(x) + inv.resolve(x) - x).norm() < 1e-12);

    // Against the direct construction A^{-1}(v) = M^{-1}(v - b).
    const Matrix mi = m.inverse();
    const Vector b = std::get<AffineParams>(op.params()).offset;
    const auto direct = ResolventOperator::affine(mi, -(mi * b));
    for (double lambda : {0.3, 1.0, 4.0}) {
      CHECK((inv.resolve(x, lambda) - direct.resolve(x, lambda)).norm() < 1e-9);
    }
  }

  // Moreau decomposition for a projection.
  const auto ball = ResolventOperator::ball(vec({1, 1}), 1);
  const Vector x = vec({4, 5});
  CHECK((ball.resolve(x) + inverse(ball).resolve(x) - x).norm() < 1e-14);
}

TEST_CASE("ovee resolvent") {
  const auto b = ResolventOperator::affine(mat1(1), vec({1}));
  const auto bv = ovee(b);
  for (double x : {-3.0, 0.0, 2.5}) {
    CHECK(b.resolve(vec({x}))[0] == doctest::Approx((x - 1) / 2));
    CHECK(bv.resolve(vec({x}))[0] == doctest::Approx((x + 1) / 2));
  }
  CHECK(bv.kind() == OperatorKind::ovee_of);
  CHECK(inverse(b).kind() == OperatorKind::inverse_of);

  // Ovee of a ball centered at c is the ball centered at -c.
  const auto ball = ResolventOperator::ball(vec({2, 0}), 1);
  CHECK((ovee(ball).resolve(vec({0, 0})) - vec({-1, 0})).norm() < 1e-15);
}

TEST_CASE("firm nonexpansiveness across the catalog and transforms") {
  Rng rng(99);
  std::vector<ResolventOperator> catalog = {
      ResolventOperator::zero(3),
      ResolventOperator::affine(random_monotone(rng, 3), rng.normal_vector(3)),
      ResolventOperator::ball(rng.normal_vector(3), 1.5),
      ResolventOperator::box(vec({-1, 0, -2}), vec({1, 0.5, 2})),
      ResolventOperator::halfspace(rng.normal_vector(3), 0.7),
      ResolventOperator::affine_set(rng.normal_vector(3), rng.normal_matrix(3, 2)),
  };
  const std::size_t base = catalog.size();
  for (std::size_t k = 0; k < base; ++k) {
    catalog.push_back(inverse(catalog[k]));
    catalog.push_back(ovee(catalog[k]));
  }
  for (const auto& op : catalog) {
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const Vector x = 5.0 * rng.normal_vector(3);
      const Vector y = 5.0 * rng.normal_vector(3);
      const double lambda = rng.uniform(0.1, 5.0);
      worst = std::min(worst, firm_slack(op, x, y, lambda));
    }
    INFO(op.describe());
    CHECK(worst >= -1e-9);
  }
}

TEST_CASE("product operator") {
  const ProductOperator op({ResolventOperator::affine(mat1(1), vec({0})),
                            ResolventOperator::affine(mat1(1), vec({-2}))});
  const ProductPoint x = ProductPoint::from_flat(vec({4.0 / 3, 2.0 / 3}), 2);
  const ProductPoint y = product_resolve(op, x);
  CHECK(y.flat()[0] == doctest::Approx(2.0 / 3));
  CHECK(y.flat()[1] == doctest::Approx(4.0 / 3));

  const ProductOperator zeros({ResolventOperator::zero(2), ResolventOperator::zero(2),
                               ResolventOperator::zero(2)});
  Rng rng(1);
  const ProductPoint p = rng.uniform_point(3, 2, -1, 1);
  CHECK(distance(product_resolve(zeros, p), p) == 0.0);

  CHECK(code_of([] { ProductOperator({ResolventOperator::zero(2)}); }) ==
        ErrorCode::invalid_argument);
  CHECK(code_of([] {
          ProductOperator({ResolventOperator::zero(2), ResolventOperator::zero(3)});
        }) == ErrorCode::dimension_mismatch);
  CHECK(&op.factor_mod(-1) == &op.factor(1));
}
