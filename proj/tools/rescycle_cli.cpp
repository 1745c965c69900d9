// Command-line front end. Talks to the library only through rescycle.h.

#include "rescycle/rescycle.h"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<double> tol;
  std::optional<size_t> max_iter;
  std::optional<uint64_t> seed;
  std::optional<size_t> starts;
  std::vector<double> alphas;
  std::vector<std::string> maps;
};

int report_error(const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, rc_last_error());
  return RC_CONFIG_ERROR;
}

rc_map map_of(const std::string& s) { return s == "composed" ? RC_MAP_COMPOSED : RC_MAP_AVERAGED; }

void apply_sweep_grid(rc_problem* p, const Options& opt) {
  if (opt.maps.empty() && opt.alphas.empty()) return;
  const std::vector<std::string> maps =
      opt.maps.empty() ? std::vector<std::string>{"composed", "averaged"} : opt.maps;
  rc_problem_sweep_clear(p);
  for (const auto& m : maps) {
    if (opt.alphas.empty()) {
      rc_problem_sweep_add(p, map_of(m), m == "composed" ? 0.5 : 1.0);
      continue;
    }
    for (double a : opt.alphas) {
      if (m == "composed" && a >= 1.0) continue;
      rc_problem_sweep_add(p, map_of(m), a);
    }
  }
}

void print_summary(const rc_result* r, rc_command command) {
  const size_t starts = rc_result_num_starts(r);
  size_t converged = 0;
  for (size_t k = 0; k < starts; ++k) converged += rc_result_start_converged(r, k);
  if (command != RC_DUALITY) std::printf("starts: %zu, converged: %zu\n", starts, converged);

  const size_t checks = rc_result_num_checks(r);
  for (size_t k = 0; k < checks; ++k) {
    const char* name = nullptr;
    int pass = 0;
    double value = 0.0;
    double threshold = 0.0;
    rc_result_check(r, k, &name, &pass, &value, &threshold);
    std::printf("%-22s %s  %.3e (<= %.1e)\n", name, pass ? "PASS" : "FAIL", value, threshold);
  }
  std::printf("%s\n", rc_result_message(r));
}

int run(rc_command command, const Options& opt, bool sweep) {
  rc_problem* p = nullptr;
  if (rc_problem_load(opt.config.c_str(), &p) != RC_OK) return report_error("config");
  if (opt.tol) rc_problem_set_tol(p, *opt.tol);
  if (opt.max_iter) rc_problem_set_max_iter(p, *opt.max_iter);
  if (opt.seed) rc_problem_set_seed(p, *opt.seed);
  if (opt.starts) rc_problem_set_starts(p, *opt.starts);
  if (sweep) apply_sweep_grid(p, opt);

  rc_result* r = nullptr;
  const rc_status status = rc_run(p, command, &r);
  rc_problem_free(p);
  if (status != RC_OK) return report_error("run");

  print_summary(r, command);
  int code = rc_result_exit_code(r);
  if (rc_result_write(r, opt.out.c_str()) != RC_OK) {
    std::fprintf(stderr, "error: output: %s\n", rc_last_error());
    if (code == 0) code = RC_CHECK_FAILED;
  }
  rc_result_free(r);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycles of resolvent compositions: solve, verify, duality, sweep"};
  app.set_version_flag("--version", rc_version());
  app.require_subcommand(1);

  Options opt;
  app.add_option("--tol", opt.tol, "Residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", opt.max_iter, "Iteration cap per start");
  app.add_option("--seed", opt.seed, "Seed for the random starts");
  app.add_option("--out", opt.out, "Output directory")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Find cycles from random starts");
  auto* verify = app.add_subcommand("verify", "Solve, then run the invariant checks");
  auto* duality = app.add_subcommand("duality", "Primal/dual relations for two affine operators");
  auto* sweep = app.add_subcommand("sweep", "Solve over a grid of maps and relaxation parameters");
  for (auto* sub : {solve, verify, duality, sweep}) {
    sub->add_option("config", opt.config, "JSON problem config")->required();
    sub->fallthrough();
  }
  sweep->add_option("--starts", opt.starts, "Number of random starts");
  sweep->add_option("--alpha", opt.alphas, "Relaxation parameter(s)");
  sweep->add_option("--map", opt.maps, "Map(s) to sweep")
      ->check(CLI::IsMember({"composed", "averaged"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : RC_CONFIG_ERROR;
  }

  if (solve->parsed()) return run(RC_SOLVE, opt, false);
  if (verify->parsed()) return run(RC_VERIFY, opt, false);
  if (duality->parsed()) return run(RC_DUALITY, opt, false);
  return run(RC_SWEEP, opt, true);
}
