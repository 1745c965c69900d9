#include "rescycle/cycles.hpp"

#include "rescycle/error.hpp"
#include "rescycle/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rescycle {

const char* to_string(MapKind map) noexcept {
  switch (map) {
    case MapKind::composed: return "composed";
    case MapKind::averaged: return "averaged";
  }
  return "unknown";
}

void validate(const SolveConfig& cfg) {
  if (!(cfg.tol > 0.0)) fail(ErrorCode::invalid_argument, "tol must be positive");
  if (cfg.max_iter < 1) fail(ErrorCode::invalid_argument, "max_iter must be >= 1");
  if (cfg.map == MapKind::composed) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
      fail(ErrorCode::invalid_argument, "composed map requires alpha in (0, 1)");
    }
  } else if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    fail(ErrorCode::invalid_argument, "averaged map requires alpha in (0, 1]");
  }
}

namespace {

void require_shape(const ProductOperator& op, const ProductPoint& x) {
  if (x.blocks() != op.blocks() || x.dim() != op.dim()) {
    fail(ErrorCode::dimension_mismatch,
         "point has " + std::to_string(x.blocks()) + " blocks of dimension " +
             std::to_string(x.dim()) + ", operator expects " + std::to_string(op.blocks()) +
             " of dimension " + std::to_string(op.dim()));
  }
}

void require_block(const ProductOperator& op, std::size_t block) {
  if (block >= op.blocks()) {
    fail(ErrorCode::index_out_of_range, "block index " + std::to_string(block) +
                                            " out of range for m = " +
                                            std::to_string(op.blocks()));
  }
}

}  // namespace

ProductPoint step_composed(const ProductOperator& op, const ProductPoint& x) {
  require_shape(op, x);
  return product_resolve(op, shift(x), 1.0);
}

ProductPoint step_averaged(const ProductOperator& op, const ProductPoint& x) {
  require_shape(op, x);
  return product_resolve(op, 0.5 * (x + shift(x)), 0.5);
}

double composed_residual(const ProductOperator& op, const ProductPoint& x) {
  return distance(x, step_composed(op, x));
}

double averaged_residual(const ProductOperator& op, const ProductPoint& x) {
  return distance(x, step_averaged(op, x));
}

SolveReport find_cycle(const ProductOperator& op, const ProductPoint& x0, const SolveConfig& cfg) {
  validate(cfg);
  require_shape(op, x0);

  SolveReport report{false, false, std::nullopt, std::nullopt, {}, x0, 0};
  ProductPoint x = x0;
  std::vector<double> best_so_far;
  double best = std::numeric_limits<double>::infinity();

  for (std::size_t k = 0;; ++k) {
    const ProductPoint composed = step_composed(op, x);
    const double residual = distance(x, composed);
    report.trace.push_back({k, residual, distance(shift(x), x)});
    if (cfg.on_iterate) cfg.on_iterate(k, x);

    best = std::min(best, residual);
    best_so_far.push_back(best);
    report.iterations = k;

    if (residual <= cfg.tol) {
      report.converged = true;
      Cycle c{x, residual, k, cfg.map};
      report.gap = gap_vector(c);
      report.cycle = std::move(c);
      break;
    }
    if (k >= cfg.max_iter) break;
    if (cfg.stall_window > 0 && k >= cfg.stall_window &&
        best_so_far[k - cfg.stall_window] - best < cfg.stall_improvement) {
      report.stalled = true;
      break;
    }

    const ProductPoint image = cfg.map == MapKind::composed ? composed : step_averaged(op, x);
    if (cfg.alpha == 1.0) {
      x = image;
    } else {
      x = (1.0 - cfg.alpha) * x + cfg.alpha * image;
    }
  }
  report.last_iterate = x;
  return report;
}

Vector cyclic_composition(const ProductOperator& op, const Vector& z, std::size_t block) {
  require_block(op, block);
  const std::size_t m = op.blocks();
  Vector v = z;
  for (std::size_t step = 1; step <= m; ++step) {
    v = op.factor((block + step) % m).resolve(v, 1.0);
  }
  return v;
}

bool membership_Fi(const ProductOperator& op, const Vector& z, std::size_t block, double tol) {
  return (z - cyclic_composition(op, z, block)).norm() <= tol;
}

Cycle cycle_from_fixed_point(const ProductOperator& op, const Vector& z, std::size_t block,
                             double tol) {
  require_block(op, block);
  if (!membership_Fi(op, z, block, tol)) {
    fail(ErrorCode::not_a_fixed_point,
         "point is not in F_" + std::to_string(block) + " within tol");
  }
  const std::size_t m = op.blocks();
  ProductPoint point(m, op.dim());
  point.block(block) = z;
  Vector v = z;
  for (std::size_t step = 1; step < m; ++step) {
    const std::size_t i = (block + step) % m;
    v = op.factor(i).resolve(v, 1.0);
    point.block(i) = v;
  }
  const double closing = (op.factor(block).resolve(v, 1.0) - z).norm();
  if (closing > tol) {
    fail(ErrorCode::cycle_invalid, "closing link J(z_prev) = z fails by " + std::to_string(closing));
  }
  const double residual = composed_residual(op, point);
  return Cycle{std::move(point), residual, 0, MapKind::composed};
}

GapVector gap_vector(const Cycle& c) { return GapVector{shift(c.point) - c.point}; }

double link_residual(const ProductOperator& op, const ProductPoint& z) {
  require_shape(op, z);
  double worst = 0.0;
  for (std::size_t i = 0; i < z.blocks(); ++i) {
    const auto prev = static_cast<std::ptrdiff_t>(i) - 1;
    worst = std::max(worst, (Vector(z.block(i)) - op.factor(i).resolve(z.block_mod(prev), 1.0)).norm());
  }
  return worst;
}

double translation_deviation(const ProductOperator& op, const Cycle& c,
                             std::span<const Vector> samples, std::size_t block,
                             double membership_tol) {
  require_block(op, block);
  require_shape(op, c.point);
  const std::size_t next = (block + 1) % op.blocks();
  const GapVector gap = gap_vector(c);
  const Vector y_next = gap.y.block(next);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const Vector& z = samples[s];
    if (!membership_Fi(op, z, block, membership_tol)) {
      fail(ErrorCode::sample_not_in_fi,
           "sample " + std::to_string(s) + " is not in F_" + std::to_string(block));
    }
    const Vector predicted = z - y_next;
    worst = std::max(worst, (op.factor(next).resolve(z, 1.0) - predicted).norm());
  }
  return worst;
}

bool check_translation(const ProductOperator& op, const Cycle& c, std::span<const Vector> samples,
                       std::size_t block, double tol) {
  return translation_deviation(op, c, samples, block, tol) <= tol;
}

Vector extract_block(const Cycle& c, std::size_t block) {
  if (block >= c.point.blocks()) {
    fail(ErrorCode::index_out_of_range, "block index " + std::to_string(block) +
                                            " out of range for m = " +
                                            std::to_string(c.point.blocks()));
  }
  return c.point.block(block);
}

std::vector<Vector> sample_Fi(const ProductOperator& op, std::size_t block, std::size_t count,
                              std::uint64_t seed, double tol, double box, std::size_t max_iter) {
  require_block(op, block);
  Rng rng(seed);
  std::vector<Vector> out;
  out.reserve(count);
  // Cap the attempts so an empty F_i cannot loop forever.
  for (std::size_t attempt = 0; out.size() < count && attempt < 4 * count; ++attempt) {
    Vector x = rng.uniform_vector(op.dim(), -box, box);
    for (std::size_t k = 0; k < max_iter; ++k) {
      const Vector tx = cyclic_composition(op, x, block);
      if ((x - tx).norm() <= tol) {
        out.push_back(tx);
        break;
      }
      x = 0.5 * (x + tx);
    }
  }
  return out;
}

}  // namespace rescycle
