#include <doctest.h>

#include "rescycle/error.hpp"
#include "rescycle/oracles.hpp"
#include "rescycle/random.hpp"

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

}  // namespace

TEST_CASE("affine cycle oracle: unique solution") {
  const ProductOperator op({ResolventOperator::affine(mat1(1), vec({0})),
                            ResolventOperator::affine(mat1(1), vec({-2}))});
  const auto r = oracle::affine_cycle_oracle(op);
  REQUIRE(r.kind == oracle::AffineCycleResult::Kind::unique);
  CHECK(r.point->flat()[0] == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(r.point->flat()[1] == doctest::Approx(4.0 / 3).epsilon(1e-14));
  // Substitution: (1 + 1) z_1 - z_2 = 0 and (1 + 1) z_2 - z_1 = 2.
  CHECK(std::abs(2 * r.point->flat()[0] - r.point->flat()[1]) < 1e-14);
  CHECK(std::abs(2 * r.point->flat()[1] - r.point->flat()[0] - 2) < 1e-14);
}

TEST_CASE("affine cycle oracle: no solution and diagonal family") {
  const ProductOperator shift({ResolventOperator::affine(mat1(0), vec({-1})),
                               ResolventOperator::affine(mat1(0), vec({-1}))});
  CHECK(oracle::affine_cycle_oracle(shift).kind == oracle::AffineCycleResult::Kind::none);

  const ProductOperator zeros({ResolventOperator::zero(2), ResolventOperator::zero(2),
                               ResolventOperator::zero(2)});
  const auto r = oracle::affine_cycle_oracle(zeros);
  REQUIRE(r.kind == oracle::AffineCycleResult::Kind::affine_subspace);
  CHECK(r.kernel.cols() == 2);
  // Every kernel direction is diagonal.
  for (Eigen::Index k = 0; k < r.kernel.cols(); ++k) {
    const ProductPoint d = ProductPoint::from_flat(r.kernel.col(k), 3);
    CHECK(distance(d, project_diagonal(d)) < 1e-12);
  }

  const ProductOperator mixed({ResolventOperator::ball(vec({0}), 1), ResolventOperator::zero(1)});
  CHECK(code_of([&] { oracle::affine_cycle_oracle(mixed); }) == ErrorCode::invalid_argument);
}

TEST_CASE("grid projection oracle") {
  const auto ball = ResolventOperator::ball(vec({-2, 0}), 1);
  CHECK((oracle::projection_grid(ball, vec({1, 0}), 1e-3) - vec({-1, 0})).norm() < 2e-3);

  const auto box = ResolventOperator::box(vec({0, 0}), vec({1, 1}));
  CHECK((oracle::projection_grid(box, vec({2, -1}), 1e-3) - vec({1, 0})).norm() < 2e-3);

  const Vector inside = vec({0.3217, 0.6642});
  CHECK((oracle::projection_grid(box, inside, 1e-3) - inside).norm() < 1e-3);

  const auto half = ResolventOperator::halfspace(vec({1, 2, -1}), 0.5);
  const Vector x = vec({0.8, 0.9, 0.1});
  CHECK((oracle::projection_grid(half, x, 1e-2) - half.resolve(x)).norm() < 2e-2);

  CHECK(code_of([] {
          oracle::projection_grid(ResolventOperator::zero(2), vec({0, 0}), 1e-3);
        }) == ErrorCode::invalid_argument);
}

TEST_CASE("least-squares displacement oracle") {
  const ProductPoint y = ProductPoint::from_flat(vec({1, 0, -1}), 3);
  const ProductPoint x = oracle::displacement_lsq(y);
  CHECK(x.flat()[0] == doctest::Approx(1.0 / 3));
  CHECK(x.flat()[1] == doctest::Approx(1.0 / 3));
  CHECK(x.flat()[2] == doctest::Approx(-2.0 / 3));

  CHECK(oracle::displacement_lsq(ProductPoint(4, 2)).norm() < 1e-15);

  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    ProductPoint r = rng.uniform_point(4, 3, -2, 2);
    r -= project_diagonal(r);
    const ProductPoint s = oracle::displacement_lsq(r);
    const Vector back = (Matrix::Identity(12, 12) - oracle::shift_matrix(4, 3)) * s.flat();
    CHECK((back - r.flat()).norm() < 1e-9);
  }

  CHECK(code_of([] {
          oracle::displacement_lsq(ProductPoint::from_flat(vec({1, 1, 1}), 3));
        }) == ErrorCode::inconsistent_system);
}
