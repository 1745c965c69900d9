#include "rescycle/rescycle.h"

#include "rescycle/error.hpp"
#include "rescycle/harness.hpp"

#include <algorithm>
#include <exception>
#include <new>
#include <string>

using namespace rescycle;

struct rc_problem {
  ProblemConfig config;
};

struct rc_result {
  RunResult run;
  std::string json;
};

namespace {

thread_local std::string last_error;

rc_status set_error(rc_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

rc_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::validation_error:
      return RC_CONFIG_ERROR;
    case ErrorCode::io_error:
      return RC_IO_ERROR;
    default:
      return RC_INVALID_ARGUMENT;
  }
}

template <class F>
rc_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RC_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RC_INTERNAL_ERROR, e.what());
  } catch (...) {
    return set_error(RC_INTERNAL_ERROR, "unknown error");
  }
}

MapKind map_of(rc_map map) { return map == RC_MAP_COMPOSED ? MapKind::composed : MapKind::averaged; }

rc_status copy_out(const std::vector<double>& values, double* buffer, size_t length) {
  if (buffer == nullptr || length < values.size()) {
    return set_error(RC_INVALID_ARGUMENT,
                     "buffer holds " + std::to_string(length) + " values, need " +
                         std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), buffer);
  return RC_OK;
}

const StartRecord* start_of(const rc_result* r, size_t k) {
  if (r == nullptr || k >= r->run.starts.size()) return nullptr;
  return &r->run.starts[k];
}

}  // namespace

extern "C" {

const char* rc_version(void) { return library_version(); }

const char* rc_last_error(void) { return last_error.c_str(); }

rc_status rc_problem_load(const char* path, rc_problem** out) {
  if (path == nullptr || out == nullptr) return set_error(RC_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new rc_problem{load_config(path)};
    return RC_OK;
  });
}

rc_status rc_problem_parse(const char* text, size_t length, rc_problem** out) {
  if (text == nullptr || out == nullptr) return set_error(RC_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new rc_problem{parse_config(std::string(text, length))};
    return RC_OK;
  });
}

void rc_problem_free(rc_problem* problem) { delete problem; }

size_t rc_problem_blocks(const rc_problem* problem) {
  return problem ? problem->config.blocks() : 0;
}

size_t rc_problem_dimension(const rc_problem* problem) {
  return problem ? problem->config.dimension : 0;
}

const char* rc_problem_config_hash(const rc_problem* problem) {
  return problem ? problem->config.config_hash.c_str() : "";
}

#define RC_REQUIRE_PROBLEM \
  if (problem == nullptr) return set_error(RC_INVALID_ARGUMENT, "null problem")

rc_status rc_problem_set_tol(rc_problem* problem, double tol) {
  RC_REQUIRE_PROBLEM;
  problem->config.solver.tol = tol;
  return RC_OK;
}

rc_status rc_problem_set_max_iter(rc_problem* problem, size_t max_iter) {
  RC_REQUIRE_PROBLEM;
  problem->config.solver.max_iter = max_iter;
  return RC_OK;
}

rc_status rc_problem_set_seed(rc_problem* problem, uint64_t seed) {
  RC_REQUIRE_PROBLEM;
  problem->config.solver.seed = seed;
  return RC_OK;
}

rc_status rc_problem_set_starts(rc_problem* problem, size_t starts) {
  RC_REQUIRE_PROBLEM;
  problem->config.solver.starts = starts;
  return RC_OK;
}

rc_status rc_problem_set_map(rc_problem* problem, rc_map map) {
  RC_REQUIRE_PROBLEM;
  problem->config.solver.map = map_of(map);
  problem->config.solver.alpha = map == RC_MAP_COMPOSED ? 0.5 : 1.0;
  return RC_OK;
}

rc_status rc_problem_set_alpha(rc_problem* problem, double alpha) {
  RC_REQUIRE_PROBLEM;
  problem->config.solver.alpha = alpha;
  return RC_OK;
}

rc_status rc_problem_sweep_clear(rc_problem* problem) {
  RC_REQUIRE_PROBLEM;
  problem->config.sweep.clear();
  return RC_OK;
}

rc_status rc_problem_sweep_add(rc_problem* problem, rc_map map, double alpha) {
  RC_REQUIRE_PROBLEM;
  problem->config.sweep.push_back({map_of(map), alpha});
  return RC_OK;
}

#undef RC_REQUIRE_PROBLEM

rc_status rc_run(const rc_problem* problem, rc_command command, rc_result** out) {
  if (problem == nullptr || out == nullptr) return set_error(RC_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    RunResult run;
    switch (command) {
      case RC_SOLVE: run = run_solve(problem->config); break;
      case RC_VERIFY: run = run_verify(problem->config); break;
      case RC_DUALITY: run = run_duality(problem->config); break;
      case RC_SWEEP: run = run_sweep(problem->config); break;
      default: return set_error(RC_INVALID_ARGUMENT, "unknown command");
    }
    std::string text = serialize(run) + "\n";
    *out = new rc_result{std::move(run), std::move(text)};
    return RC_OK;
  });
}

void rc_result_free(rc_result* result) { delete result; }

int rc_result_exit_code(const rc_result* result) {
  return result ? result->run.exit_code : RC_INTERNAL_ERROR;
}

const char* rc_result_message(const rc_result* result) {
  return result ? result->run.message.c_str() : "";
}

const char* rc_result_json(const rc_result* result) { return result ? result->json.c_str() : ""; }

rc_status rc_result_write(const rc_result* result, const char* dir) {
  if (result == nullptr || dir == nullptr) return set_error(RC_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    write_outputs(result->run, dir);
    return RC_OK;
  });
}

size_t rc_result_num_starts(const rc_result* result) {
  return result ? result->run.starts.size() : 0;
}

int rc_result_start_converged(const rc_result* result, size_t start) {
  const StartRecord* s = start_of(result, start);
  return s != nullptr && s->converged ? 1 : 0;
}

size_t rc_result_start_iterations(const rc_result* result, size_t start) {
  const StartRecord* s = start_of(result, start);
  return s ? s->iterations : 0;
}

rc_status rc_result_cycle(const rc_result* result, size_t start, double* buffer, size_t length) {
  const StartRecord* s = start_of(result, start);
  if (s == nullptr) return set_error(RC_INVALID_ARGUMENT, "start index out of range");
  if (!s->cycle) return set_error(RC_INVALID_ARGUMENT, "start did not produce a cycle");
  return copy_out(*s->cycle, buffer, length);
}

rc_status rc_result_gap(const rc_result* result, size_t start, double* buffer, size_t length) {
  const StartRecord* s = start_of(result, start);
  if (s == nullptr) return set_error(RC_INVALID_ARGUMENT, "start index out of range");
  if (!s->gap) return set_error(RC_INVALID_ARGUMENT, "start did not produce a gap vector");
  return copy_out(*s->gap, buffer, length);
}

rc_status rc_result_consensus_gap(const rc_result* result, double* buffer, size_t length) {
  if (result == nullptr) return set_error(RC_INVALID_ARGUMENT, "null result");
  if (!result->run.consensus_gap) return set_error(RC_INVALID_ARGUMENT, "no gap vector");
  return copy_out(*result->run.consensus_gap, buffer, length);
}

size_t rc_result_trace_length(const rc_result* result, size_t start) {
  const StartRecord* s = start_of(result, start);
  return s ? s->trace.size() : 0;
}

rc_status rc_result_trace_row(const rc_result* result, size_t start, size_t row,
                              size_t* iteration, double* residual, double* gap_norm) {
  const StartRecord* s = start_of(result, start);
  if (s == nullptr || row >= s->trace.size()) {
    return set_error(RC_INVALID_ARGUMENT, "trace row out of range");
  }
  const TraceRow& t = s->trace[row];
  if (iteration) *iteration = t.iteration;
  if (residual) *residual = t.residual;
  if (gap_norm) *gap_norm = t.gap_norm;
  return RC_OK;
}

size_t rc_result_num_checks(const rc_result* result) {
  return result ? result->run.checks.size() : 0;
}

rc_status rc_result_check(const rc_result* result, size_t index, const char** name, int* pass,
                          double* value, double* threshold) {
  if (result == nullptr || index >= result->run.checks.size()) {
    return set_error(RC_INVALID_ARGUMENT, "check index out of range");
  }
  const CheckRecord& c = result->run.checks[index];
  if (name) *name = c.name.c_str();
  if (pass) *pass = c.pass ? 1 : 0;
  if (value) *value = c.value;
  if (threshold) *threshold = c.threshold;
  return RC_OK;
}

}  // extern "C"
