#include "randns/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "randns/io.hpp"

namespace randns {

using nlohmann::json;

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Randomize: return "randomize";
    case ExperimentKind::Evolve: return "evolve";
    case ExperimentKind::Solve: return "solve";
    case ExperimentKind::Tail: return "tail";
    case ExperimentKind::Scaling: return "scaling";
    case ExperimentKind::Theorem: return "theorem";
    case ExperimentKind::Khinchin: return "khinchin";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::Randomize, ExperimentKind::Evolve, ExperimentKind::Solve,
                 ExperimentKind::Tail, ExperimentKind::Scaling, ExperimentKind::Theorem,
                 ExperimentKind::Khinchin})
    if (name == to_string(k)) return k;
  throw ManifestError("kind: unknown experiment kind '" + name +
                      "' (expected randomize, evolve, solve, tail, scaling, theorem or khinchin)");
}

namespace {

// Typed access to one JSON object; remembers which keys were read so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(const json& parent, const std::string& key, const std::string& path)
      : path_(path.empty() ? key : path + "." + key) {
    if (key.empty()) {
      obj_ = &parent;
      path_ = path;
    } else if (parent.contains(key)) {
      obj_ = &parent.at(key);
    }
    if (obj_ && !obj_->is_object()) fail(path_.empty() ? "(root)" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key) && !obj_->at(key).is_null(); }

  double number(const std::string& key, double def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) fail(at(key), "expected a number");
    return v->get<double>();
  }
  std::optional<double> optional_number(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) fail(at(key), "expected a number");
    return v->get<double>();
  }
  std::int64_t integer(const std::string& key, std::int64_t def, std::int64_t lo) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_integer()) fail(at(key), "expected an integer");
    const auto x = v->get<std::int64_t>();
    if (x < lo) fail(at(key), "must be >= " + std::to_string(lo));
    return x;
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
      fail(at(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(at(key), "expected true or false");
    return v->get<bool>();
  }
  std::string string(const std::string& key, const std::string& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) fail(at(key), "expected a string");
    return v->get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back((*v)[i].get<double>());
    }
    return out;
  }

  void allow(std::initializer_list<const char*> keys) {
    for (const char* k : keys) seen_.insert(k);
  }

  void reject_unknown() const {
    if (!obj_) return;
    for (const auto& [k, _] : obj_->items())
      if (!seen_.count(k)) fail(at(k), "unknown key");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ManifestError(path + ": " + msg);
  }

 private:
  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key) || obj_->at(key).is_null()) return nullptr;
    return &obj_->at(key);
  }

  const json* obj_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

std::size_t default_samples(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Tail: return 5000;
    case ExperimentKind::Scaling: return 2000;
    case ExperimentKind::Theorem: return 500;
    case ExperimentKind::Khinchin: return 100000;
    default: return 1;
  }
}

std::size_t min_samples(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Tail: return 2000;
    case ExperimentKind::Scaling: return 100;
    case ExperimentKind::Theorem: return 200;
    case ExperimentKind::Khinchin: return 1000;
    default: return 1;
  }
}

json to_json(const ExperimentManifest& m) {
  json j;
  j["kind"] = to_string(m.kind);
  j["params"] = {{"N", m.params.dim}, {"s", m.params.s}, {"m", m.params.m}};
  j["torus"] = {{"M", m.torus.modes}, {"G", m.torus.grid}};
  j["time"] = {{"T", m.time.T}, {"J", m.time.steps}, {"T_grid", m.T_grid}};
  j["data"] = {{"source", m.data.kind}, {"amplitude", m.data.amplitude},
               {"epsilon", m.data.epsilon}, {"kmax", m.data.kmax},
               {"seed", m.data.seed}, {"path", m.data.path}};
  j["ensemble"] = {{"samples", m.samples},
                   {"seed", m.seed},
                   {"sample_index", m.sample_index},
                   {"randomize", m.randomize_data},
                   {"lambda", m.lambda ? json(*m.lambda) : json(nullptr)},
                   {"lambda_grid", m.lambda_grid},
                   {"selector", to_string(m.selector)},
                   {"r", m.r},
                   {"coefficients", m.coefficients},
                   {"random_vectors", m.random_vectors},
                   {"vector_length", m.vector_length},
                   {"r_values", m.r_values}};
  j["solver"] = {{"tol", m.solver.tol},
                 {"max_iter", m.solver.max_iter},
                 {"divergence_threshold", m.solver.divergence_threshold},
                 {"substeps", m.substeps},
                 {"solve_nonmembers", m.solve_nonmembers},
                 {"calibration_samples", m.calibration_samples},
                 {"calibration_seed", m.calibration_seed},
                 {"safety", m.safety}};
  j["output"] = {{"path", m.out}, {"csv", m.csv}};
  return j;
}

}  // namespace

ExperimentManifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw ManifestError("(root): manifest must be a JSON object");
  Section root(j, "", "");
  ExperimentManifest m;
  const std::string kind = root.string("kind", "");
  if (kind.empty()) Section::fail("kind", "missing experiment kind");
  m.kind = parse_kind(kind);

  {
    Section p(j, "params", "");
    const auto dim = p.integer("N", 2, 0);
    if (dim != 2 && dim != 3) Section::fail("params.N", "dimension must be 2 or 3");
    const double s = p.number("s", -0.2);
    const auto mm = p.optional_number("m");
    try {
      m.params = admissible_parameters(static_cast<int>(dim), s, mm);
    } catch (const ParameterError& e) {
      throw ManifestError(std::string(mm && std::string(e.what()).rfind("m =", 0) == 0
                                          ? "params.m"
                                          : "params.s") +
                          ": " + e.what());
    }
    p.reject_unknown();
  }
  const int dim = m.params.dim;

  {
    Section t(j, "torus", "");
    const auto M = t.integer("M", dim == 2 ? 32 : 16, 2);
    const auto G = t.integer("G", 2 * M, 1);
    try {
      m.torus = TorusSpec::make(dim, static_cast<int>(M), static_cast<int>(G));
    } catch (const std::invalid_argument& e) {
      throw ManifestError(std::string("torus: ") + e.what());
    }
    t.reject_unknown();
  }

  {
    Section t(j, "time", "");
    const double T = t.number("T", 0.1);
    const auto J = t.integer("J", dim == 2 ? 256 : 128, 1);
    try {
      m.time = TimeGrid::make(T, static_cast<int>(J));
    } catch (const std::invalid_argument& e) {
      throw ManifestError(std::string("time: ") + e.what());
    }
    std::vector<double> def;
    if (m.kind == ExperimentKind::Scaling)
      for (int i = 0; i < 5; ++i) def.push_back(m.time.T / (1 << i));
    if (m.kind == ExperimentKind::Theorem) def = {0.2, 0.1, 0.05, 0.025};
    m.T_grid = t.numbers("T_grid", def);
    for (std::size_t i = 0; i < m.T_grid.size(); ++i)
      if (!(m.T_grid[i] > 0.0 && m.T_grid[i] <= 1.0))
        Section::fail("time.T_grid[" + std::to_string(i) + "]", "must lie in (0, 1]");
    if (m.kind == ExperimentKind::Scaling) {
      try {
        check_geometric_grid(m.T_grid);
      } catch (const std::invalid_argument& e) {
        throw ManifestError(std::string("time.T_grid: ") + e.what());
      }
    }
    if (m.kind == ExperimentKind::Theorem && m.T_grid.empty())
      Section::fail("time.T_grid", "theorem experiments need a nonempty T-grid");
    t.reject_unknown();
  }

  {
    Section d(j, "data", "");
    m.data.kind = d.string("source", "canonical");
    static const std::set<std::string> kinds{"canonical", "file", "shear", "taylor_green",
                                             "smooth", "zero"};
    if (!kinds.count(m.data.kind))
      Section::fail("data.source", "unknown data source '" + m.data.kind +
                                       "' (expected canonical, file, shear, taylor_green, smooth or zero)");
    m.data.amplitude = d.number("amplitude", 1.0);
    if (!(m.data.amplitude >= 0.0)) Section::fail("data.amplitude", "must be >= 0");
    m.data.epsilon = d.number("epsilon", 0.01);
    if (!(m.data.epsilon > 0.0)) Section::fail("data.epsilon", "must be > 0");
    m.data.kmax = static_cast<int>(d.integer("kmax", 3, 1));
    m.data.seed = d.unsigned_integer("seed", 0);
    m.data.path = d.string("path", "");
    if (m.data.kind == "file" && m.data.path.empty())
      Section::fail("data.path", "required when data.source is 'file'");
    d.reject_unknown();
  }

  {
    Section e(j, "ensemble", "");
    const auto S = e.integer("samples", static_cast<std::int64_t>(default_samples(m.kind)), 1);
    m.samples = static_cast<std::size_t>(S);
    if (m.samples < min_samples(m.kind))
      Section::fail("ensemble.samples", std::string(to_string(m.kind)) + " experiments need at least " +
                                            std::to_string(min_samples(m.kind)) + " samples");
    m.seed = e.unsigned_integer("seed", 0);
    m.sample_index = e.unsigned_integer("sample_index", 0);
    m.randomize_data = e.boolean("randomize", false);
    m.lambda = e.optional_number("lambda");
    if (m.lambda && !(*m.lambda > 0.0)) Section::fail("ensemble.lambda", "must be > 0");
    m.lambda_grid = e.numbers("lambda_grid", {});
    for (std::size_t i = 0; i < m.lambda_grid.size(); ++i)
      if (!(m.lambda_grid[i] >= 0.0))
        Section::fail("ensemble.lambda_grid[" + std::to_string(i) + "]", "must be >= 0");
    const std::string sel = e.string(
        "selector", m.params.regime == Regime::Rough ? "E1" : "E2");
    try {
      m.selector = parse_selector(sel);
      if (m.kind == ExperimentKind::Tail || m.kind == ExperimentKind::Scaling)
        check_selector(m.selector, m.params);
    } catch (const std::invalid_argument& ex) {
      throw ManifestError(std::string("ensemble.selector: ") + ex.what());
    }
    m.r = e.number("r", 2.0);
    if (!(m.r >= 2.0)) Section::fail("ensemble.r", "moment order must be >= 2");
    m.coefficients = e.numbers("coefficients", {});
    m.random_vectors = static_cast<std::size_t>(e.integer("random_vectors", 20, 1));
    m.vector_length = static_cast<std::size_t>(e.integer("vector_length", 16, 1));
    m.r_values = e.numbers("r_values", {2, 4, 8, 16});
    for (std::size_t i = 0; i < m.r_values.size(); ++i)
      if (!(m.r_values[i] >= 2.0))
        Section::fail("ensemble.r_values[" + std::to_string(i) + "]", "moment order must be >= 2");
    e.reject_unknown();
  }

  {
    Section s(j, "solver", "");
    m.solver.tol = s.number("tol", 1e-9);
    if (!(m.solver.tol > 0.0)) Section::fail("solver.tol", "must be > 0");
    m.solver.max_iter = static_cast<int>(s.integer("max_iter", 60, 1));
    m.solver.divergence_threshold = s.number("divergence_threshold", 1e6);
    if (!(m.solver.divergence_threshold > 0.0))
      Section::fail("solver.divergence_threshold", "must be > 0");
    m.substeps = static_cast<int>(s.integer("substeps", 1, 1));
    m.solve_nonmembers = s.boolean("solve_nonmembers", true);
    m.calibration_samples = static_cast<std::size_t>(s.integer("calibration_samples", 64, 2));
    m.calibration_seed = s.unsigned_integer("calibration_seed", 0x5eed);
    m.safety = s.number("safety", 0.5);
    if (!(m.safety > 0.0 && m.safety <= 1.0)) Section::fail("solver.safety", "must lie in (0, 1]");
    s.reject_unknown();
  }

  {
    Section o(j, "output", "");
    m.out = o.string("path", "randns_out");
    m.csv = o.boolean("csv", true);
    o.reject_unknown();
  }

  root.allow({"params", "torus", "time", "data", "ensemble", "solver", "output"});
  root.reject_unknown();
  m.effective = to_json(m);
  return m;
}

ExperimentManifest parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestError(std::string("(syntax): ") + e.what());
  }
  return manifest_from_json(j);
}

json read_manifest_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ManifestError(std::string("(syntax): ") + e.what());
  }
}

std::string manifest_digest(const json& effective) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : effective.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace randns
