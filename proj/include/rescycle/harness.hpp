#pragma once

// Config ingestion, experiment orchestration and result persistence.

#include "rescycle/cycles.hpp"
#include "rescycle/duality.hpp"
#include "rescycle/operators.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rescycle {

/// Process exit codes shared by the CLI and the C API.
enum class ExitCode : int { ok = 0, check_failed = 1, no_convergence = 2, config_error = 3 };

struct SolverSettings {
  MapKind map = MapKind::averaged;
  double alpha = 1.0;
  double tol = 1e-8;
  std::size_t max_iter = 100000;
  std::size_t starts = 1;
  std::uint64_t seed = 0;
};

struct VerifySettings {
  std::size_t samples = 10;    // F_i samples per block for the translation checks
  double duality_tol = 1e-7;
};

struct SweepSetting {
  MapKind map;
  double alpha;
};

struct ProblemConfig {
  std::size_t dimension = 0;
  std::vector<ResolventOperator> operators;
  SolverSettings solver;
  VerifySettings verify;
  /// Grid for `sweep`; empty means {composed 0.5, averaged 1}.
  std::vector<SweepSetting> sweep;
  std::string config_hash;

  std::size_t blocks() const noexcept { return operators.size(); }
  ProductOperator product() const { return ProductOperator(operators); }
};

/// Parses and validates a JSON config. Throws ErrorCode::parse_error on
/// malformed JSON and ErrorCode::validation_error with a field path
/// ("operators[1].radius: ...") on schema violations.
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::filesystem::path& path);

/// Re-validates solver settings after overrides (alpha, map, tol, ...).
void validate(const SolverSettings& s);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct StartRecord {
  std::size_t index = 0;
  MapKind map = MapKind::averaged;
  double alpha = 1.0;
  std::vector<double> start;  // flattened, m*n
  bool converged = false;
  bool stalled = false;
  std::size_t iterations = 0;
  double residual = 0.0;
  std::optional<std::vector<double>> cycle;
  std::optional<std::vector<double>> gap;
  /// Per-iteration rows; written to trace_<index>.csv, not to result.json.
  std::vector<TraceRow> trace;
};

struct CheckRecord {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct RelationRecord {
  std::string id;
  bool pass = false;
  double residual = 0.0;
};

struct DualityRecord {
  std::optional<std::vector<double>> psol;
  std::optional<std::vector<double>> dsol;
  std::vector<RelationRecord> relations;
  std::optional<double> involution_deviation;
  std::string error;
};

struct SweepRecord {
  MapKind map = MapKind::averaged;
  double alpha = 1.0;
  std::size_t starts = 0;
  std::size_t converged = 0;
  double mean_iterations = 0.0;
  std::size_t max_iterations = 0;
  std::optional<double> gap_dispersion;
};

struct RunResult {
  std::string command;
  std::string config_hash;
  std::size_t dimension = 0;
  std::size_t blocks = 0;
  std::uint64_t seed = 0;
  SolverSettings solver;
  std::vector<StartRecord> starts;
  std::optional<std::vector<double>> consensus_gap;
  std::optional<double> gap_dispersion;
  std::optional<DualityRecord> duality;
  std::vector<SweepRecord> sweep;
  std::vector<CheckRecord> checks;
  int exit_code = 0;
  std::string message;
};

void to_json(nlohmann::json& j, const RunResult& r);
void from_json(const nlohmann::json& j, RunResult& r);

/// Stable textual form of result.json.
std::string serialize(const RunResult& r);
RunResult parse_result(const std::string& text);

/// Initial points: start k is the k-th draw of m*n values uniform in
/// [-10, 10) from Rng(seed).
std::vector<ProductPoint> draw_starts(const ProblemConfig& cfg);

RunResult run_solve(const ProblemConfig& cfg);
RunResult run_verify(const ProblemConfig& cfg);
/// Requires exactly two affine operators (ErrorCode::validation_error).
RunResult run_duality(const ProblemConfig& cfg);
RunResult run_sweep(const ProblemConfig& cfg);

/// Writes <dir>/result.json, <dir>/trace_<k>.csv and <dir>/meta.json.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

/// `iter,residual,gap_norm` rows with 17 significant digits.
std::string trace_csv(const std::vector<TraceRow>& rows);

const char* library_version() noexcept;

}  // namespace rescycle
