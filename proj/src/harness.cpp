#include "rescycle/harness.hpp"

#include "rescycle/error.hpp"
#include "rescycle/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace rescycle {

using nlohmann::json;

const char* library_version() noexcept { return "0.3.0"; }

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  fail(ErrorCode::validation_error, path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) invalid(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) invalid(path + "." + key, "missing required field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) invalid(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

Vector vector_of(const json& j, std::size_t n, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array of " + std::to_string(n) + " numbers");
  if (j.size() != n) {
    invalid(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
  }
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    v[static_cast<Eigen::Index>(i)] = number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix rows_of(const json& j, std::size_t rows, std::size_t cols, const std::string& path) {
  if (!j.is_array() || j.size() != rows) {
    invalid(path, "expected " + std::to_string(rows) + " rows");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    m.row(static_cast<Eigen::Index>(r)) =
        vector_of(j[r], cols, path + "[" + std::to_string(r) + "]").transpose();
  }
  return m;
}

MapKind map_of(const std::string& s, const std::string& path) {
  if (s == "composed") return MapKind::composed;
  if (s == "averaged") return MapKind::averaged;
  invalid(path, "map must be \"composed\" or \"averaged\", got \"" + s + "\"");
}

ResolventOperator operator_of(const json& d, std::size_t n, const std::string& path) {
  const json& kind_j = require(d, "kind", path);
  if (!kind_j.is_string()) invalid(path + ".kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  try {
    if (kind == "zero") return ResolventOperator::zero(n);
    if (kind == "affine") {
      const auto zeros = static_cast<Eigen::Index>(n);
      Matrix mat = d.contains("matrix") ? rows_of(d["matrix"], n, n, path + ".matrix")
                                        : Matrix::Zero(zeros, zeros);
      Vector off = d.contains("offset") ? vector_of(d["offset"], n, path + ".offset")
                                        : Vector::Zero(zeros);
      return ResolventOperator::affine(std::move(mat), std::move(off));
    }
    if (kind == "ball") {
      return ResolventOperator::ball(vector_of(require(d, "center", path), n, path + ".center"),
                                     number(require(d, "radius", path), path + ".radius"));
    }
    if (kind == "box") {
      return ResolventOperator::box(vector_of(require(d, "lower", path), n, path + ".lower"),
                                    vector_of(require(d, "upper", path), n, path + ".upper"));
    }
    if (kind == "halfspace") {
      return ResolventOperator::halfspace(
          vector_of(require(d, "normal", path), n, path + ".normal"),
          number(require(d, "bound", path), path + ".bound"));
    }
    if (kind == "affine_set") {
      Vector point = vector_of(require(d, "point", path), n, path + ".point");
      const json empty = json::array();
      const json& basis_j = d.contains("basis") ? d["basis"] : empty;
      if (!basis_j.is_array()) invalid(path + ".basis", "expected an array of vectors");
      // Config lists basis vectors; the operator takes them as columns.
      Matrix basis = basis_j.empty()
                         ? Matrix(static_cast<Eigen::Index>(n), 0)
                         : Matrix(rows_of(basis_j, basis_j.size(), n, path + ".basis").transpose());
      return ResolventOperator::affine_set(std::move(point), std::move(basis));
    }
    if (kind == "inverse") return inverse(operator_of(require(d, "of", path), n, path + ".of"));
    if (kind == "ovee") return ovee(operator_of(require(d, "of", path), n, path + ".of"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::validation_error) throw;
    invalid(path, e.what());
  }
  invalid(path + ".kind", "unknown operator kind \"" + kind + "\"");
}

void parse_sweep(const json& s, ProblemConfig& cfg) {
  std::vector<MapKind> maps;
  std::vector<double> alphas;
  if (s.contains("maps")) {
    const json& mj = s["maps"];
    if (!mj.is_array()) invalid("sweep.maps", "expected an array");
    for (std::size_t i = 0; i < mj.size(); ++i) {
      const std::string p = "sweep.maps[" + std::to_string(i) + "]";
      if (!mj[i].is_string()) invalid(p, "expected a string");
      maps.push_back(map_of(mj[i].get<std::string>(), p));
    }
  }
  if (s.contains("alphas")) {
    const json& aj = s["alphas"];
    if (!aj.is_array()) invalid("sweep.alphas", "expected an array");
    for (std::size_t i = 0; i < aj.size(); ++i) {
      alphas.push_back(number(aj[i], "sweep.alphas[" + std::to_string(i) + "]"));
    }
  }
  for (MapKind m : maps) {
    for (double a : alphas) {
      if (!(a > 0.0 && a <= 1.0)) invalid("sweep.alphas", "alpha must lie in (0, 1]");
      if (m == MapKind::composed && a >= 1.0) continue;
      cfg.sweep.push_back({m, a});
    }
  }
}

std::vector<double> flat_of(const ProductPoint& p) {
  return {p.flat().data(), p.flat().data() + p.flat().size()};
}

ProductPoint point_of(const std::vector<double>& flat, std::size_t blocks) {
  Vector v = Eigen::Map<const Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
  return ProductPoint::from_flat(std::move(v), blocks);
}

json nested(const std::vector<double>& flat, std::size_t dim) {
  json out = json::array();
  for (std::size_t i = 0; i < flat.size(); i += dim) {
    out.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(i),
                                      flat.begin() + static_cast<std::ptrdiff_t>(i + dim)));
  }
  return out;
}

std::vector<double> flatten(const json& j) {
  std::vector<double> out;
  for (const auto& block : j)
    for (const auto& v : block) out.push_back(v.get<double>());
  return out;
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

std::optional<double> max_pairwise_distance(const std::vector<ProductPoint>& pts) {
  if (pts.size() < 2) return std::nullopt;
  double worst = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) worst = std::max(worst, distance(pts[a], pts[b]));
  return worst;
}

StartRecord solve_one(const ProductOperator& op, const ProductPoint& x0, std::size_t index,
                      const SolverSettings& s) {
  SolveConfig sc;
  sc.map = s.map;
  sc.alpha = s.alpha;
  sc.tol = s.tol;
  sc.max_iter = s.max_iter;
  SolveReport rep = find_cycle(op, x0, sc);

  StartRecord rec;
  rec.index = index;
  rec.map = s.map;
  rec.alpha = s.alpha;
  rec.start = flat_of(x0);
  rec.converged = rep.converged;
  rec.stalled = rep.stalled;
  rec.iterations = rep.iterations;
  rec.residual = rep.trace.back().residual;
  if (rep.cycle) rec.cycle = flat_of(rep.cycle->point);
  if (rep.gap) rec.gap = flat_of(rep.gap->y);
  rec.trace = std::move(rep.trace);
  return rec;
}

// Shared tail of solve / verify / sweep: consensus gap, dispersion, exit code.
void summarize(RunResult& r) {
  std::vector<ProductPoint> gaps;
  std::size_t failed = 0;
  bool stalled = false;
  for (const auto& s : r.starts) {
    if (s.gap) gaps.push_back(point_of(*s.gap, r.blocks));
    if (!s.converged) {
      ++failed;
      stalled = stalled || s.stalled;
    }
  }
  if (!gaps.empty()) {
    ProductPoint mean(r.blocks, r.dimension);
    for (const auto& g : gaps) mean += g;
    mean *= 1.0 / static_cast<double>(gaps.size());
    r.consensus_gap = flat_of(mean);
  }
  r.gap_dispersion = max_pairwise_distance(gaps);
  if (failed > 0) {
    r.exit_code = static_cast<int>(ExitCode::no_convergence);
    r.message = std::to_string(failed) + " of " + std::to_string(r.starts.size()) +
                " starts did not converge" + (stalled ? " (stalled)" : "") +
                "; no cycle found. A cycle exists iff every F_i is nonempty, so the F_i "
                "appear to be empty and no gap vector exists.";
  } else {
    r.exit_code = static_cast<int>(ExitCode::ok);
    r.message = "all starts converged";
  }
}

RunResult base_result(const ProblemConfig& cfg, const char* command) {
  RunResult r;
  r.command = command;
  r.config_hash = cfg.config_hash;
  r.dimension = cfg.dimension;
  r.blocks = cfg.blocks();
  r.seed = cfg.solver.seed;
  r.solver = cfg.solver;
  return r;
}

void add_check(RunResult& r, std::string name, double value, double threshold,
               std::string note = {}) {
  r.checks.push_back({std::move(name), value <= threshold, value, threshold, std::move(note)});
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const SolverSettings& s) {
  SolveConfig sc;
  sc.map = s.map;
  sc.alpha = s.alpha;
  sc.tol = s.tol;
  sc.max_iter = s.max_iter;
  try {
    validate(sc);
  } catch (const Error& e) {
    invalid("solver", e.what());
  }
  if (s.starts < 1) invalid("solver.starts", "must be >= 1");
}

ProblemConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse_error, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) invalid("$", "config must be a JSON object");

  ProblemConfig cfg;
  cfg.config_hash = fnv1a_hex(text);
  cfg.dimension = count(require(root, "dimension", "$"), "dimension");
  if (cfg.dimension < 1) invalid("dimension", "must be >= 1");

  const json& ops = require(root, "operators", "$");
  if (!ops.is_array()) invalid("operators", "expected an array");
  if (ops.size() < 2) invalid("operators", "m >= 2 operators required, got " + std::to_string(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i) {
    cfg.operators.push_back(operator_of(ops[i], cfg.dimension, "operators[" + std::to_string(i) + "]"));
  }

  if (root.contains("solver")) {
    const json& s = root["solver"];
    if (!s.is_object()) invalid("solver", "expected an object");
    if (s.contains("map")) {
      if (!s["map"].is_string()) invalid("solver.map", "expected a string");
      cfg.solver.map = map_of(s["map"].get<std::string>(), "solver.map");
    }
    cfg.solver.alpha = cfg.solver.map == MapKind::composed ? 0.5 : 1.0;
    if (s.contains("alpha")) cfg.solver.alpha = number(s["alpha"], "solver.alpha");
    if (s.contains("tol")) cfg.solver.tol = number(s["tol"], "solver.tol");
    if (s.contains("max_iter")) cfg.solver.max_iter = count(s["max_iter"], "solver.max_iter");
    if (s.contains("starts")) cfg.solver.starts = count(s["starts"], "solver.starts");
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) invalid("solver.seed", "expected a nonnegative integer");
      cfg.solver.seed = s["seed"].get<std::uint64_t>();
    }
  }
  validate(cfg.solver);

  if (root.contains("verify")) {
    const json& v = root["verify"];
    if (v.contains("samples")) cfg.verify.samples = count(v["samples"], "verify.samples");
    if (v.contains("duality_tol")) {
      cfg.verify.duality_tol = number(v["duality_tol"], "verify.duality_tol");
      if (!(cfg.verify.duality_tol > 0.0)) invalid("verify.duality_tol", "must be positive");
    }
  }
  if (root.contains("sweep")) parse_sweep(root["sweep"], cfg);
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::parse_error, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<ProductPoint> draw_starts(const ProblemConfig& cfg) {
  Rng rng(cfg.solver.seed);
  std::vector<ProductPoint> out;
  out.reserve(cfg.solver.starts);
  for (std::size_t k = 0; k < cfg.solver.starts; ++k) {
    out.push_back(rng.uniform_point(cfg.blocks(), cfg.dimension, -10.0, 10.0));
  }
  return out;
}

RunResult run_solve(const ProblemConfig& cfg) {
  validate(cfg.solver);
  RunResult r = base_result(cfg, "solve");
  const ProductOperator op = cfg.product();
  const auto starts = draw_starts(cfg);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    r.starts.push_back(solve_one(op, starts[k], k, cfg.solver));
  }
  summarize(r);
  return r;
}

RunResult run_verify(const ProblemConfig& cfg) {
  RunResult r = run_solve(cfg);
  r.command = "verify";
  if (r.exit_code != static_cast<int>(ExitCode::ok)) return r;

  const ProductOperator op = cfg.product();
  const double tol = cfg.solver.tol;
  const double dtol = cfg.verify.duality_tol;
  const std::size_t m = op.blocks();

  std::vector<Cycle> cycles;
  for (const auto& s : r.starts) {
    const ProductPoint z = point_of(*s.cycle, m);
    cycles.push_back(Cycle{z, s.residual, s.iterations, s.map});
  }

  double links = 0.0;
  for (const auto& c : cycles) links = std::max(links, link_residual(op, c.point));
  add_check(r, "def51_closure", links, 10.0 * tol);

  // Limits of both maps must be fixed by the other one.
  double cross = 0.0;
  for (const auto& c : cycles) cross = std::max(cross, averaged_residual(op, c.point));
  {
    SolverSettings other = cfg.solver;
    other.map = cfg.solver.map == MapKind::averaged ? MapKind::composed : MapKind::averaged;
    other.alpha = other.map == MapKind::composed ? 0.5 : 1.0;
    const StartRecord alt = solve_one(op, point_of(r.starts.front().start, m), 0, other);
    if (alt.converged) {
      const ProductPoint z = point_of(*alt.cycle, m);
      cross = std::max({cross, averaged_residual(op, z), composed_residual(op, z)});
    } else {
      cross = std::numeric_limits<double>::infinity();
    }
  }
  add_check(r, "fixed_set_equality", cross, 2.0 * tol);

  double membership = 0.0;
  for (const auto& c : cycles)
    for (std::size_t i = 0; i < m; ++i)
      membership = std::max(membership, (Vector(c.point.block(i)) -
                                         cyclic_composition(op, c.point.block(i), i)).norm());
  add_check(r, "block_membership", membership, 10.0 * tol);

  double dperp = 0.0;
  for (const auto& s : r.starts) dperp = std::max(dperp, point_of(*s.gap, m).block_sum().norm());
  add_check(r, "gap_in_dperp", dperp, 1e-9);

  if (r.gap_dispersion) {
    add_check(r, "gap_uniqueness", *r.gap_dispersion, 1e-6);
  } else {
    add_check(r, "gap_uniqueness", 0.0, 1e-6, "single start");
  }

  {
    constexpr std::size_t kMaxPairs = 2000;
    double worst = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < cycles.size() && pairs < kMaxPairs; ++a) {
      for (std::size_t b = a + 1; b < cycles.size() && pairs < kMaxPairs; ++b) {
        if (distance(cycles[a].point, cycles[b].point) <= 1e-6) continue;
        ++pairs;
        const ProductPoint mid = 0.5 * (cycles[a].point + cycles[b].point);
        worst = std::max(worst, composed_residual(op, mid));
      }
    }
    add_check(r, "z_convexity", worst, 10.0 * tol,
              pairs == 0 ? "all cycles coincide" : std::to_string(pairs) + " distinct pairs");
  }

  {
    double translation = 0.0;
    double images = 0.0;
    std::size_t sampled = 0;
    std::vector<std::vector<Vector>> samples(m);
    for (std::size_t i = 0; i < m; ++i) {
      samples[i] = sample_Fi(op, i, cfg.verify.samples, cfg.solver.seed + 1000003ULL * (i + 1));
      sampled += samples[i].size();
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (samples[i].empty()) continue;
      translation = std::max(translation,
                             translation_deviation(op, cycles.front(), samples[i], i, 10.0 * tol));
      const std::size_t next = (i + 1) % m;
      for (const auto& zs : samples[i]) {
        const Vector image = op.factor(next).resolve(zs, 1.0);
        images = std::max(images, (image - cyclic_composition(op, image, next)).norm());
      }
    }
    const std::string note = std::to_string(sampled) + " sampled F_i points";
    add_check(r, "translation", translation, dtol, note);
    add_check(r, "resolvent_images", images, 10.0 * tol, note);
  }

  {
    double worst = 0.0;
    const Cycle& c = cycles.front();
    for (std::size_t i = 0; i < m; ++i) {
      try {
        const Cycle rebuilt = cycle_from_fixed_point(op, extract_block(c, i), i, 10.0 * tol);
        worst = std::max(worst, distance(rebuilt.point, c.point));
      } catch (const Error&) {
        worst = std::numeric_limits<double>::infinity();
      }
    }
    add_check(r, "block_reconstruction", worst, 10.0 * tol);
  }

  {
    double worst = 0.0;
    bool all = true;
    for (const auto& c : cycles) {
      const DualityReport rep = verify_cycle_duality(op, c, dtol);
      all = all && rep.all_pass();
      for (const auto& rel : rep.relations) worst = std::max(worst, rel.residual);
    }
    r.checks.push_back({"cycle_duality", all && worst <= dtol, worst, dtol, {}});
  }

  const bool ok = std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.pass; });
  r.exit_code = static_cast<int>(ok ? ExitCode::ok : ExitCode::check_failed);
  r.message = ok ? "all checks passed" : "one or more checks failed";
  return r;
}

RunResult run_duality(const ProblemConfig& cfg) {
  if (cfg.blocks() != 2) invalid("operators", "duality needs exactly two operators");
  for (std::size_t i = 0; i < 2; ++i) {
    if (cfg.operators[i].kind() != OperatorKind::affine) {
      invalid("operators[" + std::to_string(i) + "]", "duality needs affine operators");
    }
  }
  RunResult r = base_result(cfg, "duality");
  const ResolventOperator& a = cfg.operators[0];
  const ResolventOperator& b = cfg.operators[1];
  const double tol = cfg.verify.duality_tol;

  DualityRecord rec;
  try {
    const DualityReport rep = verify_singleton_relations(a, b, tol);
    rec.psol = std::vector<double>(rep.psol->data(), rep.psol->data() + rep.psol->size());
    rec.dsol = std::vector<double>(rep.dsol->data(), rep.dsol->data() + rep.dsol->size());
    for (const auto& rel : rep.relations) {
      rec.relations.push_back({rel.id, rel.pass, rel.residual});
      add_check(r, rel.id, rel.residual, tol);
    }
  } catch (const Error& e) {
    rec.error = std::string(to_string(e.code())) + ": " + e.what();
    r.checks.push_back({"singleton_solutions", false, 0.0, 0.0, rec.error});
  }
  rec.involution_deviation = dual_pair_involution_deviation(a, b);
  add_check(r, "dual_pair_involution", *rec.involution_deviation, 1e-9);
  r.duality = std::move(rec);

  const bool ok = std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.pass; });
  r.exit_code = static_cast<int>(ok ? ExitCode::ok : ExitCode::check_failed);
  r.message = ok ? "all relations hold" : "one or more relations failed";
  return r;
}

RunResult run_sweep(const ProblemConfig& cfg) {
  validate(cfg.solver);
  std::vector<SweepSetting> grid = cfg.sweep;
  if (grid.empty()) grid = {{MapKind::composed, 0.5}, {MapKind::averaged, 1.0}};

  RunResult r = base_result(cfg, "sweep");
  const ProductOperator op = cfg.product();
  const auto starts = draw_starts(cfg);
  std::size_t index = 0;
  for (const auto& setting : grid) {
    SolverSettings s = cfg.solver;
    s.map = setting.map;
    s.alpha = setting.alpha;
    validate(s);

    SweepRecord rec;
    rec.map = setting.map;
    rec.alpha = setting.alpha;
    rec.starts = starts.size();
    std::vector<ProductPoint> gaps;
    double iter_sum = 0.0;
    for (const auto& x0 : starts) {
      StartRecord sr = solve_one(op, x0, index++, s);
      iter_sum += static_cast<double>(sr.iterations);
      rec.max_iterations = std::max(rec.max_iterations, sr.iterations);
      if (sr.converged) ++rec.converged;
      if (sr.gap) gaps.push_back(point_of(*sr.gap, cfg.blocks()));
      r.starts.push_back(std::move(sr));
    }
    rec.mean_iterations = iter_sum / static_cast<double>(starts.size());
    rec.gap_dispersion = max_pairwise_distance(gaps);
    r.sweep.push_back(rec);
  }
  summarize(r);
  return r;
}

void to_json(json& j, const RunResult& r) {
  const std::size_t n = std::max<std::size_t>(r.dimension, 1);
  json starts = json::array();
  for (const auto& s : r.starts) {
    starts.push_back({
        {"index", s.index},
        {"map", to_string(s.map)},
        {"alpha", s.alpha},
        {"start", nested(s.start, n)},
        {"converged", s.converged},
        {"stalled", s.stalled},
        {"iterations", s.iterations},
        {"residual", s.residual},
        {"cycle", s.cycle ? nested(*s.cycle, n) : json(nullptr)},
        {"gap", s.gap ? nested(*s.gap, n) : json(nullptr)},
    });
  }
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value},
                      {"threshold", c.threshold}, {"note", c.note}});
  }
  json sweep = json::array();
  for (const auto& s : r.sweep) {
    sweep.push_back({{"map", to_string(s.map)}, {"alpha", s.alpha}, {"starts", s.starts},
                     {"converged", s.converged}, {"mean_iterations", s.mean_iterations},
                     {"max_iterations", s.max_iterations},
                     {"gap_dispersion", optional_json(s.gap_dispersion)}});
  }
  json duality = nullptr;
  if (r.duality) {
    json rels = json::array();
    for (const auto& rel : r.duality->relations) {
      rels.push_back({{"relation", rel.id}, {"pass", rel.pass}, {"residual", rel.residual}});
    }
    duality = {{"psol", optional_json(r.duality->psol)},
               {"dsol", optional_json(r.duality->dsol)},
               {"relations", rels},
               {"involution_deviation", optional_json(r.duality->involution_deviation)},
               {"error", r.duality->error}};
  }
  j = {
      {"command", r.command},
      {"config_hash", r.config_hash},
      {"dimension", r.dimension},
      {"blocks", r.blocks},
      {"seed", r.seed},
      {"solver",
       {{"map", to_string(r.solver.map)},
        {"alpha", r.solver.alpha},
        {"tol", r.solver.tol},
        {"max_iter", r.solver.max_iter},
        {"starts", r.solver.starts}}},
      {"starts", starts},
      {"consensus_gap", r.consensus_gap ? nested(*r.consensus_gap, n) : json(nullptr)},
      {"gap_dispersion", optional_json(r.gap_dispersion)},
      {"duality", duality},
      {"sweep", sweep},
      {"checks", checks},
      {"exit_code", r.exit_code},
      {"message", r.message},
  };
}

void from_json(const json& j, RunResult& r) {
  r = RunResult{};
  j.at("command").get_to(r.command);
  j.at("config_hash").get_to(r.config_hash);
  j.at("dimension").get_to(r.dimension);
  j.at("blocks").get_to(r.blocks);
  j.at("seed").get_to(r.seed);
  const json& s = j.at("solver");
  r.solver.map = map_of(s.at("map").get<std::string>(), "solver.map");
  s.at("alpha").get_to(r.solver.alpha);
  s.at("tol").get_to(r.solver.tol);
  s.at("max_iter").get_to(r.solver.max_iter);
  s.at("starts").get_to(r.solver.starts);
  r.solver.seed = r.seed;
  for (const auto& sj : j.at("starts")) {
    StartRecord rec;
    sj.at("index").get_to(rec.index);
    rec.map = map_of(sj.at("map").get<std::string>(), "starts.map");
    sj.at("alpha").get_to(rec.alpha);
    rec.start = flatten(sj.at("start"));
    sj.at("converged").get_to(rec.converged);
    sj.at("stalled").get_to(rec.stalled);
    sj.at("iterations").get_to(rec.iterations);
    sj.at("residual").get_to(rec.residual);
    if (!sj.at("cycle").is_null()) rec.cycle = flatten(sj["cycle"]);
    if (!sj.at("gap").is_null()) rec.gap = flatten(sj["gap"]);
    r.starts.push_back(std::move(rec));
  }
  if (!j.at("consensus_gap").is_null()) r.consensus_gap = flatten(j["consensus_gap"]);
  r.gap_dispersion = optional_from<double>(j, "gap_dispersion");
  if (!j.at("duality").is_null()) {
    const json& d = j["duality"];
    DualityRecord rec;
    rec.psol = optional_from<std::vector<double>>(d, "psol");
    rec.dsol = optional_from<std::vector<double>>(d, "dsol");
    for (const auto& rel : d.at("relations")) {
      rec.relations.push_back({rel.at("relation").get<std::string>(), rel.at("pass").get<bool>(),
                               rel.at("residual").get<double>()});
    }
    rec.involution_deviation = optional_from<double>(d, "involution_deviation");
    d.at("error").get_to(rec.error);
    r.duality = std::move(rec);
  }
  for (const auto& sw : j.at("sweep")) {
    SweepRecord rec;
    rec.map = map_of(sw.at("map").get<std::string>(), "sweep.map");
    sw.at("alpha").get_to(rec.alpha);
    sw.at("starts").get_to(rec.starts);
    sw.at("converged").get_to(rec.converged);
    sw.at("mean_iterations").get_to(rec.mean_iterations);
    sw.at("max_iterations").get_to(rec.max_iterations);
    rec.gap_dispersion = optional_from<double>(sw, "gap_dispersion");
    r.sweep.push_back(rec);
  }
  for (const auto& c : j.at("checks")) {
    r.checks.push_back({c.at("name").get<std::string>(), c.at("pass").get<bool>(),
                        c.at("value").get<double>(), c.at("threshold").get<double>(),
                        c.at("note").get<std::string>()});
  }
  j.at("exit_code").get_to(r.exit_code);
  j.at("message").get_to(r.message);
}

std::string serialize(const RunResult& r) { return json(r).dump(2); }

RunResult parse_result(const std::string& text) {
  try {
    return json::parse(text).get<RunResult>();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("malformed result file: ") + e.what());
  }
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "iter,residual,gap_norm\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", row.iteration, row.residual, row.gap_norm);
    out += buf;
  }
  return out;
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create output directory " + dir.string());

  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) fail(ErrorCode::io_error, "cannot write " + p.string());
  };

  write(dir / "result.json", serialize(r) + "\n");
  for (const auto& s : r.starts) {
    write(dir / ("trace_" + std::to_string(s.index) + ".csv"), trace_csv(s.trace));
  }

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const json meta = {
      {"config_hash", r.config_hash},
      {"seed", r.seed},
      {"command", r.command},
      {"library_version", library_version()},
      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__},
      {"generated_at", stamp},
  };
  write(dir / "meta.json", meta.dump(2) + "\n");
}

}  // namespace rescycle
