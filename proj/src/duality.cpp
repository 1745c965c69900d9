#include "rescycle/duality.hpp"

#include "rescycle/error.hpp"
#include "rescycle/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rescycle {

namespace {

bool invertible(const Eigen::PartialPivLU<Matrix>& lu) {
  const double threshold =
      static_cast<double>(lu.rows()) * std::numeric_limits<double>::epsilon();
  return lu.rcond() > threshold;
}

double dist(const Vector& a, const Vector& b) { return (a - b).norm(); }

void require_same_dim(const ResolventOperator& a, const ResolventOperator& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::dimension_mismatch, "operator pair differs in dimension");
}

}  // namespace

AffineMap::AffineMap(Matrix matrix, Vector offset)
    : matrix_(std::move(matrix)), offset_(std::move(offset)) {
  if (matrix_.rows() != offset_.size() || matrix_.cols() != offset_.size()) {
    fail(ErrorCode::dimension_mismatch, "affine map: matrix must be n x n");
  }
}

AffineMap AffineMap::from_operator(const ResolventOperator& op) {
  const auto* p = std::get_if<AffineParams>(&op.params());
  if (p == nullptr) {
    fail(ErrorCode::invalid_argument,
         std::string("expected an affine operator, got ") + to_string(op.kind()));
  }
  return AffineMap(p->matrix, p->offset);
}

AffineMap AffineMap::inverse() const {
  Eigen::PartialPivLU<Matrix> lu(matrix_);
  if (!invertible(lu)) fail(ErrorCode::singular_factor, "affine map is not invertible");
  Matrix inv = lu.inverse();
  Vector off = -(inv * offset_);
  return AffineMap(std::move(inv), std::move(off));
}

AffineMap AffineMap::ovee() const { return AffineMap(matrix_, -offset_); }

bool DualityReport::all_pass() const {
  return std::all_of(relations.begin(), relations.end(), [](const auto& r) { return r.pass; });
}

Vector psol_affine(const ResolventOperator& a, const ResolventOperator& b) {
  require_same_dim(a, b);
  const AffineMap fa = AffineMap::from_operator(a);
  const AffineMap fb = AffineMap::from_operator(b);
  Eigen::PartialPivLU<Matrix> lu(fa.matrix() + fb.matrix());
  if (!invertible(lu)) {
    fail(ErrorCode::singular_sum, "M_A + M_B is singular; the primal solution set is not a singleton");
  }
  return lu.solve(-(fa.offset() + fb.offset()));
}

Vector dsol_affine(const ResolventOperator& a, const ResolventOperator& b) {
  require_same_dim(a, b);
  const AffineMap a_inv = AffineMap::from_operator(a).inverse();
  const AffineMap b_inv = AffineMap::from_operator(b).inverse();
  // A^{-1}(y) - B^{-1}(-y) = (Ma^{-1} + Mb^{-1}) y + c_A - c_B with c the
  // inverse offsets.
  Eigen::PartialPivLU<Matrix> lu(a_inv.matrix() + b_inv.matrix());
  if (!invertible(lu)) {
    fail(ErrorCode::singular_sum, "dual system is singular; the dual solution set is not a singleton");
  }
  return lu.solve(b_inv.offset() - a_inv.offset());
}

DualityReport verify_singleton_relations(const ResolventOperator& a, const ResolventOperator& b,
                                         double tol) {
  const Vector x = psol_affine(a, b);
  const Vector y = dsol_affine(a, b);

  const AffineMap fa = AffineMap::from_operator(a);
  const AffineMap fb = AffineMap::from_operator(b);
  const AffineMap fa_inv = fa.inverse();
  const AffineMap fb_inv = fb.inverse();
  const AffineMap fb_ovee = fb.ovee();
  const AffineMap fb_inv_ovee = fb_inv.ovee();  // B^{-ovee}

  const ResolventOperator a_inv = inverse(a);
  const ResolventOperator b_inv = inverse(b);
  const ResolventOperator b_ov = ovee(b);

  DualityReport report;
  report.psol = x;
  report.dsol = y;
  report.tol = tol;
  auto add = [&](const char* id, double residual) {
    report.relations.push_back({id, residual <= tol, residual});
  };

  // y in A x and y in B^ovee(-x), as values and as graph memberships.
  add("ton1", std::max({dist(y, fa(x)), dist(y, -fb(x)), dist(y, fb_ovee(-x)),
                        dist(a.resolve(x + y), x), dist(b_ov.resolve(-x + y), -x)}));
  // x in A^{-1} y and x in B^{-1}(-y) = -B^{-ovee}(y).
  add("ton2", std::max({dist(x, fa_inv(y)), dist(x, fb_inv(-y)), dist(x, -fb_inv_ovee(y)),
                        dist(a_inv.resolve(y + x), y), dist(b_inv.resolve(-y + x), -y)}));
  add("ton3", dist(y, fa(x)));
  add("ton4", std::max(dist(y, -fb(x)), dist(y, fb_ovee(-x))));
  add("ton5", dist(x, fa_inv(y)));
  add("ton6", std::max(dist(x, fb_inv(-y)), dist(x, -fb_inv_ovee(y))));
  return report;
}

double dual_pair_involution_deviation(const ResolventOperator& a, const ResolventOperator& b,
                                      std::size_t probes, std::uint64_t seed) {
  require_same_dim(a, b);
  // (A, B)* = (A^{-1}, B^{-ovee}) with B^{-ovee} = (B^{-1})^ovee.
  const ResolventOperator a_star = inverse(a);
  const ResolventOperator b_star = ovee(inverse(b));
  const ResolventOperator a_star_star = inverse(a_star);
  const ResolventOperator b_star_star = ovee(inverse(b_star));

  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < probes; ++k) {
    const Vector x = 3.0 * rng.normal_vector(a.dim());
    const double lambda = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    worst = std::max(worst, dist(a.resolve(x, lambda), a_star_star.resolve(x, lambda)));
    worst = std::max(worst, dist(b.resolve(x, lambda), b_star_star.resolve(x, lambda)));
  }
  return worst;
}

bool dual_pair_involution(const ResolventOperator& a, const ResolventOperator& b, double tol,
                          std::size_t probes, std::uint64_t seed) {
  return dual_pair_involution_deviation(a, b, probes, seed) <= tol;
}

DualityReport verify_cycle_duality(const ProductOperator& op, const Cycle& c, double tol) {
  const ProductPoint& z = c.point;
  const double residual = composed_residual(op, z);
  if (!(residual <= tol)) {
    fail(ErrorCode::cycle_invalid,
         "cycle has composed residual " + std::to_string(residual) + " > " + std::to_string(tol));
  }
  const ProductPoint y = gap_vector(c).y;

  DualityReport report;
  report.tol = tol;
  auto add = [&](const char* id, double r) { report.relations.push_back({id, r <= tol, r}); };

  double graph = 0.0;
  for (std::size_t i = 0; i < z.blocks(); ++i) {
    const Vector zi = z.block(i);
    graph = std::max(graph, dist(op.factor(i).resolve(zi + y.block(i), 1.0), zi));
  }
  add("gap_in_graph", graph);
  add("gap_displacement", distance(y, displacement(-z)));
  add("gap_in_dperp", y.block_sum().norm());

  const ProductPoint particular = solve_displacement(y, tol).particular;
  const ProductPoint w = -z - particular;
  add("primal_preimage", distance(w, project_diagonal(w)));
  return report;
}

}  // namespace rescycle
