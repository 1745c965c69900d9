#pragma once

// Cycles of resolvent compositions.
//
// A cycle is z = (z_1, ..., z_m) with z_{i+1} = J_{i+1} z_i and
// z_1 = J_1 z_m; equivalently a fixed point of J_A o R. The fixed-point sets
// F_i = Fix(J_i J_{i-1} ... J_1 J_m ... J_{i+1}) are probed blockwise.
//
// Block indices are 0-based here: block i of a cycle lies in F_i, and
// F_i's composition starts with J_{i+1} and ends with J_i.

#include "rescycle/operators.hpp"
#include "rescycle/vectorspace.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace rescycle {

enum class MapKind { composed, averaged };

const char* to_string(MapKind map) noexcept;

struct Cycle {
  ProductPoint point;
  /// |z - J_A(R z)|, measured against the composed map.
  double residual = 0.0;
  std::size_t iterations = 0;
  MapKind map_used = MapKind::averaged;
};

/// y = R z - z for a cycle z; the dual solution of (A, Id - R).
struct GapVector {
  ProductPoint y;
};

struct TraceRow {
  std::size_t iteration;
  double residual;
  double gap_norm;  // |R x - x| of the current iterate
};

struct SolveConfig {
  MapKind map = MapKind::averaged;
  double alpha = 1.0;
  double tol = 1e-8;
  std::size_t max_iter = 100000;
  /// Stall detection: stop when the best residual improved by less than
  /// `stall_improvement` over the last `stall_window` iterations.
  std::size_t stall_window = 1000;
  double stall_improvement = 1e-14;
  /// Called with every iterate, starting with x0.
  std::function<void(std::size_t, const ProductPoint&)> on_iterate;
};

/// Throws ErrorCode::invalid_argument on tol <= 0, max_iter == 0 or an alpha
/// outside (0, 1) for the composed map / (0, 1] for the averaged map.
void validate(const SolveConfig& cfg);

struct SolveReport {
  bool converged = false;
  bool stalled = false;
  std::optional<Cycle> cycle;
  std::optional<GapVector> gap;
  std::vector<TraceRow> trace;
  ProductPoint last_iterate;
  std::size_t iterations = 0;
};

/// J_A(R x).
ProductPoint step_composed(const ProductOperator& op, const ProductPoint& x);
/// J_{A/2}((x + R x) / 2). Same fixed points as step_composed.
ProductPoint step_averaged(const ProductOperator& op, const ProductPoint& x);

/// |x - J_A(R x)|.
double composed_residual(const ProductOperator& op, const ProductPoint& x);
double averaged_residual(const ProductOperator& op, const ProductPoint& x);

/// Krasnoselskii-Mann iteration x <- (1 - alpha) x + alpha T x, T chosen by
/// cfg.map. Convergence is declared when the composed-map residual is at most
/// cfg.tol. Non-convergence is reported through `converged == false` (and
/// `stalled` when the stall heuristic fired); no exception is thrown for it.
SolveReport find_cycle(const ProductOperator& op, const ProductPoint& x0, const SolveConfig& cfg);

/// The composition J_i J_{i-1} ... J_1 J_m ... J_{i+1} applied to z.
Vector cyclic_composition(const ProductOperator& op, const Vector& z, std::size_t block);

/// |z - cyclic_composition(z, block)| <= tol.
bool membership_Fi(const ProductOperator& op, const Vector& z, std::size_t block, double tol);

/// Builds the cycle through z in F_block by applying J_{block+1}, ... around
/// the ring. Throws ErrorCode::not_a_fixed_point when z is not in F_block
/// within tol and ErrorCode::cycle_invalid if the closing link fails.
Cycle cycle_from_fixed_point(const ProductOperator& op, const Vector& z, std::size_t block,
                             double tol);

GapVector gap_vector(const Cycle& c);

/// Largest link error max_i |z_i - J_i z_{i-1}|.
double link_residual(const ProductOperator& op, const ProductPoint& z);

/// max over samples of |J_{i+1}(z) - (z - y_{i+1})| for z in F_i (wrapping to
/// J_1 and y_1 for the last block). Throws ErrorCode::sample_not_in_fi when a
/// sample fails membership_Fi at `membership_tol`.
double translation_deviation(const ProductOperator& op, const Cycle& c,
                             std::span<const Vector> samples, std::size_t block,
                             double membership_tol);

/// translation_deviation(...) <= tol, with membership checked at tol.
bool check_translation(const ProductOperator& op, const Cycle& c, std::span<const Vector> samples,
                       std::size_t block, double tol);

/// z_i. Throws ErrorCode::index_out_of_range.
Vector extract_block(const Cycle& c, std::size_t block);

/// Points of F_block obtained by running a halved KM iteration of the cyclic
/// composition from uniformly drawn starts in [-box, box]^n. Starts that do
/// not reach `tol` within `max_iter` are skipped.
std::vector<Vector> sample_Fi(const ProductOperator& op, std::size_t block, std::size_t count,
                              std::uint64_t seed, double tol = 1e-12, double box = 10.0,
                              std::size_t max_iter = 200000);

}  // namespace rescycle
