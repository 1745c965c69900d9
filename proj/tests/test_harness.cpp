#include <doctest.h>

#include "rescycle/error.hpp"
#include "rescycle/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rescycle;

namespace {

const char* kTwoBalls = R"({
  "dimension": 2,
  "operators": [
    {"kind": "ball", "center": [-2, 0], "radius": 1},
    {"kind": "ball", "center": [2, 0], "radius": 1}
  ],
  "solver": {"tol": 1e-10, "starts": 5, "seed": 4}
})";

const char* kLines = R"({
  "dimension": 2,
  "operators": [
    {"kind": "affine_set", "point": [0, 0], "basis": [[0, 1]]},
    {"kind": "affine_set", "point": [2, 0], "basis": [[0, 1]]}
  ],
  "solver": {"tol": 1e-10, "starts": 12, "seed": 8},
  "verify": {"samples": 10}
})";

const char* kShift = R"({
  "dimension": 1,
  "operators": [
    {"kind": "affine", "matrix": [[0]], "offset": [1]},
    {"kind": "affine", "matrix": [[0]], "offset": [1]}
  ],
  "solver": {"starts": 2, "max_iter": 20000}
})";

const char* kZeros = R"({
  "dimension": 2,
  "operators": [{"kind": "zero"}, {"kind": "zero"}],
  "solver": {"starts": 3, "seed": 1, "tol": 1e-12}
})";

std::string with_operators(const std::string& ops) {
  return R"({"dimension": 2, "operators": )" + ops + "}";
}

std::string validation_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation_error);
    return e.what();
  }
  FAIL("config was accepted");
  return {};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const ProblemConfig cfg = parse_config(kTwoBalls);
  CHECK(cfg.blocks() == 2);
  CHECK(cfg.dimension == 2);
  CHECK(cfg.solver.starts == 5);
  CHECK(cfg.solver.map == MapKind::averaged);
  CHECK(cfg.solver.alpha == 1.0);
  CHECK(cfg.config_hash == fnv1a_hex(kTwoBalls));
  CHECK(cfg.config_hash.size() == 16);

  const ProblemConfig composed = parse_config(R"({"dimension": 1,
    "operators": [{"kind": "zero"}, {"kind": "zero"}], "solver": {"map": "composed"}})");
  CHECK(composed.solver.alpha == 0.5);

  const ProblemConfig nested = parse_config(R"({"dimension": 1, "operators": [
    {"kind": "inverse", "of": {"kind": "affine", "matrix": [[2]], "offset": [1]}},
    {"kind": "ovee", "of": {"kind": "ball", "center": [3], "radius": 1}}]})");
  CHECK(nested.operators[0].kind() == OperatorKind::inverse_of);
  CHECK(nested.operators[1].kind() == OperatorKind::ovee_of);
}

TEST_CASE("config validation reports field paths") {
  CHECK(validation_message(with_operators(R"([{"kind": "zero"}])")).find("m >= 2") !=
        std::string::npos);
  CHECK(validation_message(with_operators(
                               R"([{"kind": "zero"}, {"kind": "ball", "center": [0, 0], "radius": -1}])"))
            .find("operators[1]") != std::string::npos);
  CHECK(validation_message(with_operators(
                               R"([{"kind": "zero"}, {"kind": "ball", "center": [0], "radius": 1}])"))
            .find("operators[1].center") != std::string::npos);
  CHECK(validation_message(with_operators(R"([{"kind": "zero"}, {"kind": "blob"}])"))
            .find("operators[1].kind") != std::string::npos);
  CHECK(validation_message(R"({"dimension": 1, "operators": [{"kind": "zero"}, {"kind": "zero"}],
    "solver": {"map": "composed", "alpha": 1}})")
            .find("solver") != std::string::npos);
  CHECK(validation_message(R"({"operators": []})").find("dimension") != std::string::npos);

  try {
    parse_config("{not json");
    FAIL("accepted malformed JSON");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
  }
}

TEST_CASE("solve on two balls") {
  const RunResult r = run_solve(parse_config(kTwoBalls));
  CHECK(r.exit_code == 0);
  REQUIRE(r.starts.size() == 5);
  for (const auto& s : r.starts) {
    REQUIRE(s.cycle.has_value());
    const std::vector<double> expected{-1, 0, 1, 0};
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs((*s.cycle)[k] - expected[k]) < 1e-8);
  }
  REQUIRE(r.gap_dispersion.has_value());
  CHECK(*r.gap_dispersion < 1e-6);
  CHECK((*r.consensus_gap)[0] == doctest::Approx(2.0));
}

TEST_CASE("solve without a cycle") {
  const RunResult r = run_solve(parse_config(kShift));
  CHECK(r.exit_code == 2);
  for (const auto& s : r.starts) {
    CHECK(s.stalled);
    CHECK_FALSE(s.gap.has_value());
  }
  CHECK_FALSE(r.consensus_gap.has_value());
  CHECK(r.message.find("F_i") != std::string::npos);
}

TEST_CASE("zero operators converge to the diagonal projection of each start") {
  const ProblemConfig cfg = parse_config(kZeros);
  const RunResult r = run_solve(cfg);
  CHECK(r.exit_code == 0);
  const auto starts = draw_starts(cfg);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const ProductPoint proj = project_diagonal(starts[k]);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(std::abs((*r.starts[k].cycle)[j] - proj.flat()[static_cast<Eigen::Index>(j)]) < 1e-10);
    }
  }
}

TEST_CASE("verify passes on parallel lines and zero operators") {
  for (const char* text : {kLines, kZeros, kTwoBalls}) {
    const RunResult r = run_verify(parse_config(text));
    for (const auto& c : r.checks) {
      INFO(c.name << " = " << c.value);
      CHECK(c.pass);
    }
    CHECK(r.exit_code == 0);
    CHECK(r.checks.size() == 10);
  }
  // Midpoints are only tested between distinct cycles.
  const RunResult lines = run_verify(parse_config(kLines));
  const auto convexity = std::find_if(lines.checks.begin(), lines.checks.end(),
                                      [](const auto& c) { return c.name == "z_convexity"; });
  CHECK(convexity->note.find("distinct pairs") != std::string::npos);
}

TEST_CASE("verify stops with exit 2 when no cycle is found") {
  const RunResult r = run_verify(parse_config(kShift));
  CHECK(r.exit_code == 2);
  CHECK(r.checks.empty());
}

TEST_CASE("duality command") {
  const RunResult r = run_duality(parse_config(R"({"dimension": 1, "operators": [
    {"kind": "affine", "matrix": [[1]], "offset": [0]},
    {"kind": "affine", "matrix": [[1]], "offset": [-2]}]})"));
  CHECK(r.exit_code == 0);
  REQUIRE(r.duality.has_value());
  CHECK((*r.duality->psol)[0] == doctest::Approx(1.0));
  CHECK((*r.duality->dsol)[0] == doctest::Approx(1.0));
  CHECK(r.duality->relations.size() == 6);

  const RunResult homogeneous = run_duality(parse_config(R"({"dimension": 2, "operators": [
    {"kind": "affine", "matrix": [[1, 0], [0, 1]], "offset": [0, 0]},
    {"kind": "affine", "matrix": [[1, 0], [0, 1]], "offset": [0, 0]}]})"));
  CHECK((*homogeneous.duality->psol)[0] == 0.0);
  CHECK((*homogeneous.duality->dsol)[1] == 0.0);

  const RunResult singular = run_duality(parse_config(R"({"dimension": 1, "operators": [
    {"kind": "affine", "matrix": [[0]], "offset": [0]},
    {"kind": "affine", "matrix": [[0]], "offset": [0]}]})"));
  CHECK(singular.exit_code == 1);
  CHECK(singular.duality->error.find("SingularSum") != std::string::npos);

  CHECK_THROWS_AS(run_duality(parse_config(kTwoBalls)), Error);
}

TEST_CASE("sweep") {
  const RunResult r = run_sweep(parse_config(kTwoBalls));
  REQUIRE(r.sweep.size() == 2);
  CHECK(r.sweep[0].map == MapKind::composed);
  CHECK(r.sweep[0].alpha == 0.5);
  CHECK(r.sweep[1].map == MapKind::averaged);
  CHECK(r.starts.size() == 10);
  CHECK(*r.gap_dispersion < 1e-6);
  for (const auto& s : r.sweep) CHECK(s.converged == 5);

  // A single start with the solver's own setting reproduces run_solve.
  ProblemConfig one = parse_config(kTwoBalls);
  one.solver.starts = 1;
  one.sweep = {{MapKind::averaged, 1.0}};
  const RunResult a = run_sweep(one);
  const RunResult b = run_solve(one);
  CHECK(a.starts[0].cycle == b.starts[0].cycle);
  CHECK(a.starts[0].iterations == b.starts[0].iterations);
}

TEST_CASE("result serialization is deterministic and lossless") {
  for (const char* text : {kTwoBalls, kLines, kShift}) {
    const ProblemConfig cfg = parse_config(text);
    const RunResult r = run_verify(cfg);
    const std::string once = serialize(r);
    CHECK(serialize(run_verify(cfg)) == once);
    const RunResult back = parse_result(once);
    CHECK(serialize(back) == once);
    for (std::size_t k = 0; k < r.starts.size(); ++k) {
      CHECK(back.starts[k].start == r.starts[k].start);
      CHECK(back.starts[k].cycle == r.starts[k].cycle);
    }
  }
  const RunResult d = run_duality(parse_config(R"({"dimension": 1, "operators": [
    {"kind": "affine", "matrix": [[3]], "offset": [0.1]},
    {"kind": "affine", "matrix": [[0.7]], "offset": [-2]}]})"));
  CHECK(serialize(parse_result(serialize(d))) == serialize(d));
}

TEST_CASE("random starts are reproducible") {
  ProblemConfig cfg = parse_config(kTwoBalls);
  const auto a = draw_starts(cfg);
  const auto b = draw_starts(cfg);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(distance(a[k], b[k]) == 0.0);
  for (const auto& p : a) CHECK(p.flat().cwiseAbs().maxCoeff() <= 10.0);
  cfg.solver.seed = 5;
  CHECK(distance(draw_starts(cfg)[0], a[0]) > 0.0);
}

TEST_CASE("trace CSV uses 17 significant digits") {
  const std::string csv = trace_csv({{0, 0.1, 1.0 / 3}, {1, 2.0, 0.0}});
  CHECK(csv ==
        "iter,residual,gap_norm\n"
        "0,0.10000000000000001,0.33333333333333331\n"
        "1,2,0\n");
}

TEST_CASE("output files") {
  const auto dir = std::filesystem::temp_directory_path() / "rescycle_harness_test";
  std::filesystem::remove_all(dir);
  const RunResult r = run_solve(parse_config(kTwoBalls));
  write_outputs(r, dir);
  CHECK(slurp(dir / "result.json") == serialize(r) + "\n");
  for (std::size_t k = 0; k < 5; ++k) {
    const std::string csv = slurp(dir / ("trace_" + std::to_string(k) + ".csv"));
    CHECK(csv.rfind("iter,residual,gap_norm\n", 0) == 0);
  }
  const std::string meta = slurp(dir / "meta.json");
  CHECK(meta.find(r.config_hash) != std::string::npos);
  CHECK(meta.find("generated_at") != std::string::npos);
  CHECK(slurp(dir / "result.json").find("generated_at") == std::string::npos);
  std::filesystem::remove_all(dir);
}
