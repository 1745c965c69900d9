#include <doctest.h>

#include "rescycle/error.hpp"
#include "rescycle/oracles.hpp"
#include "rescycle/random.hpp"
#include "rescycle/vectorspace.hpp"

using namespace rescycle;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ProductPoint scalar_point(std::initializer_list<double> v) {
  return ProductPoint::from_flat(vec(v), v.size());
}

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

TEST_CASE("product point layout") {
  const ProductPoint p = ProductPoint::from_flat(vec({1, 2, 3, 4, 5, 6}), 3);
  CHECK(p.blocks() == 3);
  CHECK(p.dim() == 2);
  CHECK(p.block(1) == vec({3, 4}));
  CHECK(p.block_mod(-1) == vec({5, 6}));
  CHECK(p.block_mod(3) == vec({1, 2}));
  CHECK(p.block_sum() == vec({9, 12}));
  CHECK(p.block_mean() == vec({3, 4}));

  CHECK(code_of([] { ProductPoint(1, 2); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { ProductPoint::from_flat(vec({1, 2, 3}), 2); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("shift is the circular right shift") {
  const ProductPoint x = ProductPoint::from_flat(vec({1, 10, 2, 20, 3, 30}), 3);
  const ProductPoint s = shift(x);
  CHECK(s.block(0) == vec({3, 30}));
  CHECK(s.block(1) == vec({1, 10}));
  CHECK(s.block(2) == vec({2, 20}));

  CHECK(shift(scalar_point({5, 7})).flat() == vec({7, 5}));

  CHECK(unshift(s).flat() == x.flat());
  CHECK(unshift(scalar_point({7, 5})).flat() == vec({5, 7}));
}

TEST_CASE("shift has order m and matches the dense permutation") {
  Rng rng(3);
  for (std::size_t m = 2; m <= 6; ++m) {
    const ProductPoint x = rng.uniform_point(m, 3, -1, 1);
    ProductPoint y = x;
    for (std::size_t k = 0; k < m; ++k) y = shift(y);
    CHECK(distance(x, y) == 0.0);
    CHECK(distance(unshift(shift(x)), x) == 0.0);

    const Vector dense = oracle::shift_matrix(m, 3) * x.flat();
    CHECK((dense - shift(x).flat()).norm() == 0.0);
  }
}

TEST_CASE("displacement") {
  const ProductPoint d = displacement(scalar_point({2.0 / 3, 4.0 / 3}));
  CHECK(d.flat()[0] == doctest::Approx(-2.0 / 3).epsilon(1e-15));
  CHECK(d.flat()[1] == doctest::Approx(2.0 / 3).epsilon(1e-15));

  const ProductPoint diag = ProductPoint::diagonal(vec({1.5, -2}), 4);
  CHECK(displacement(diag).norm() == 0.0);

  Rng rng(5);
  const ProductPoint x = rng.uniform_point(4, 2, -5, 5);
  const Matrix dense = Matrix::Identity(8, 8) - oracle::shift_matrix(4, 2);
  CHECK((dense * x.flat() - displacement(x).flat()).norm() < 1e-14);
  // Range of Id - R lies in D-perp.
  CHECK(displacement(x).block_sum().norm() < 1e-12);
}

TEST_CASE("diagonal projection") {
  CHECK(project_diagonal(scalar_point({0, 2})).flat() == vec({1, 1}));
  const ProductPoint a = ProductPoint::diagonal(vec({3, -1}), 3);
  CHECK(distance(project_diagonal(a), a) == 0.0);

  Rng rng(8);
  const ProductPoint x = rng.uniform_point(5, 3, -2, 2);
  const ProductPoint p = project_diagonal(x);
  CHECK(distance(project_diagonal(p), p) < 1e-15);
  // x - Px is orthogonal to the diagonal.
  CHECK((x - p).block_sum().norm() < 1e-13);
}

TEST_CASE("solve_displacement") {
  const auto sol = solve_displacement(scalar_point({1, 0, -1}), 1e-12);
  CHECK(sol.kernel == DisplacementSolution::Kernel::diagonal);
  CHECK(sol.particular.flat()[0] == doctest::Approx(1.0 / 3));
  CHECK(sol.particular.flat()[1] == doctest::Approx(1.0 / 3));
  CHECK(sol.particular.flat()[2] == doctest::Approx(-2.0 / 3));

  CHECK(solve_displacement(ProductPoint(3, 2), 1e-12).particular.norm() == 0.0);

  CHECK(code_of([] { solve_displacement(scalar_point({1, 1, 1}), 1e-9); }) ==
        ErrorCode::not_in_range);
}

TEST_CASE("solve_displacement round trip and minimum norm") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 5);
    ProductPoint y = rng.uniform_point(m, 2, -3, 3);
    y -= project_diagonal(y);
    const ProductPoint x = solve_displacement(y, 1e-9).particular;
    CHECK(distance(displacement(x), y) < 1e-12);
    CHECK(x.block_sum().norm() < 1e-12);
  }
}

TEST_CASE("non-finite input is rejected") {
  Vector v = vec({1, std::numeric_limits<double>::quiet_NaN()});
  CHECK(code_of([&] { require_finite(v, "v"); }) == ErrorCode::invalid_argument);
}
