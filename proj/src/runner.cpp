#include "randns/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "randns/io.hpp"
#include "randns/randomization.hpp"

namespace randns {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Keeps NaN/inf out of the records (JSON has no representation for them).
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json interval(const Interval& ci) { return json::array({ci.lower, ci.upper}); }

struct Recorder {
  std::vector<json> lines;
  void add(json j) { lines.push_back(std::move(j)); }
};

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << header << "\n";
  os.precision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  if (!os.flush()) throw IoError("write failed: " + path.string());
}

VectorField datum_for_run(const ExperimentManifest& m) {
  VectorField f = build_datum(m);
  if (m.randomize_data) f = randomize(f, {m.seed, m.sample_index});
  return f;
}

bool run_randomize(const ExperimentManifest& m, const fs::path& dir, Recorder& rec, json& agg) {
  const VectorField f = build_datum(m);
  bool solenoidal = true;
  for (std::size_t i = 0; i < m.samples; ++i) {
    const std::uint64_t idx = m.sample_index + i;
    const VectorField fw = randomize(f, {m.seed, idx});
    const std::string name = "field_" + std::to_string(idx) + ".nsrf";
    save_field(dir / name, fw, m.params.s);
    const double defect = divergence_defect(fw);
    solenoidal = solenoidal && defect <= 1e-12;
    rec.add({{"type", "sample"},
             {"index", idx},
             {"sobolev_norm", sobolev_norm(fw, m.params.s)},
             {"energy", energy(fw)},
             {"divergence_defect", defect},
             {"file", name}});
  }
  agg["datum_sobolev_norm"] = sobolev_norm(f, m.params.s);
  agg["solenoidal"] = solenoidal;
  return solenoidal;
}

bool run_evolve(const ExperimentManifest& m, const fs::path& dir, Recorder& rec, json& agg) {
  const VectorField f = datum_for_run(m);
  Trajectory u;
  try {
    u = reference_timestepper(f, m.time, m.substeps);
  } catch (const SolverInstability& e) {
    agg["error"] = e.what();
    return false;
  }
  save_trajectory(dir / "trajectory.nsrt", u, m.params.s);
  for (int j = 0; j < u.grid.nodes(); ++j)
    rec.add({{"type", "node"}, {"j", j}, {"t", u.grid.node(j)}, {"energy", energy(u[j])}});
  agg["final_energy"] = energy(u[m.time.steps]);
  agg["file"] = "trajectory.nsrt";
  return true;
}

bool run_solve(const ExperimentManifest& m, const fs::path& dir, Recorder& rec, json& agg) {
  const VectorField f = datum_for_run(m);
  const double lambda = m.lambda.value_or(std::numeric_limits<double>::infinity());
  const SolveOutcome sol = picard_solve(f, m.time, m.params, lambda, m.solver);
  const auto& d = sol.diagnostics;
  for (std::size_t k = 0; k < d.differences.size(); ++k)
    rec.add({{"type", "iteration"},
             {"k", k + 1},
             {"difference", num(d.differences[k])},
             {"ratio", k ? num(d.ratios.size() >= k ? d.ratios[k - 1] : NAN) : json(nullptr)}});
  const double res = d.converged ? residual(sol.u, f) : NAN;
  if (d.converged) save_trajectory(dir / "solution.nsrt", sol.u, m.params.s);
  agg["converged"] = d.converged;
  agg["diverged"] = d.diverged;
  agg["iterations"] = d.iterations;
  agg["geometric"] = d.geometric();
  agg["max_ratio_after_first"] = d.max_ratio_after_first();
  agg["residual"] = num(res);
  agg["event_value"] = num(sol.event_value);
  agg["event_member"] = sol.event_member;
  agg["solution_norm"] = num(d.solution_norm);
  if (d.converged) agg["file"] = "solution.nsrt";
  return d.converged;
}

bool run_tail(const ExperimentManifest& m, const fs::path& dir, Recorder& rec, json& agg) {
  const VectorField f = build_datum(m);
  const TailEstimate est =
      tail_probability(f, m.params, m.selector, m.lambda_grid, m.time, m.samples, m.seed);
  for (std::size_t i = 0; i < est.norms.size(); ++i)
    rec.add({{"type", "sample"}, {"index", i}, {"norm", est.norms[i]}});
  std::vector<std::vector<double>> rows;
  for (const auto& pt : est.points) {
    rec.add({{"type", "point"},
             {"lambda", pt.lambda},
             {"exceedances", pt.exceedances},
             {"p_hat", pt.p_hat},
             {"ci95", interval(pt.ci)},
             {"upper_one_sided", pt.upper_one_sided}});
    rows.push_back({pt.lambda, static_cast<double>(pt.exceedances), pt.p_hat, pt.ci.lower,
                    pt.ci.upper});
  }
  if (m.csv) write_csv(dir / "tail.csv", "lambda,exceedances,p_hat,ci_low,ci_high", rows);
  agg["selector"] = to_string(est.selector);
  agg["datum_sobolev_norm"] = est.datum_norm;
  agg["theta"] = est.theta;
  agg["scale"] = est.scale;
  agg["window"] = {est.window_low, est.window_high};
  agg["c1"] = num(est.fit.c1);
  agg["c2"] = num(est.fit.c2);
  agg["r_squared"] = num(est.fit.r_squared);
  agg["fit_points"] = est.fit.points;
  agg["flagged"] = est.fit.flagged;
  return !est.fit.flagged;
}

bool run_scaling(const ExperimentManifest& m, const fs::path& dir, Recorder& rec, json& agg) {
  const VectorField f = build_datum(m);
  const ScalingFit fit = scaling_in_T(f, m.params, m.selector, m.r, m.T_grid, m.time.steps,
                                      m.samples, m.seed);
  std::vector<std::vector<double>> rows;
  for (const auto& pt : fit.points) {
    rec.add({{"type", "point"},
             {"T", pt.T},
             {"moment", pt.moment.value},
             {"standard_error", pt.moment.standard_error}});
    rows.push_back({pt.T, pt.moment.value, pt.moment.standard_error});
  }
  if (m.csv) write_csv(dir / "scaling.csv", "T,moment,standard_error", rows);
  agg["selector"] = to_string(fit.selector);
  agg["r"] = fit.r;
  agg["slope"] = fit.slope;
  agg["slope_se"] = num(fit.slope_se);
  agg["theta"] = fit.theta;
  agg["contract_met"] = fit.contract_met();
  return fit.contract_met();
}

bool run_theorem(const ExperimentManifest& m, const fs::path&, Recorder& rec, json& agg) {
  const VectorField f = build_datum(m);
  double lambda = 0.0;
  if (m.lambda) {
    lambda = *m.lambda;
  } else {
    const Calibration cal = calibrate_lambda(f, m.params, m.T_grid, m.time.steps,
                                             m.calibration_samples, m.solver,
                                             m.calibration_seed, m.safety);
    lambda = cal.lambda;
    agg["calibration"] = {{"lambda", cal.lambda},
                          {"contraction_limit", num(cal.contraction_limit)},
                          {"median_event", cal.median_event},
                          {"samples", cal.samples},
                          {"failures", cal.failures}};
  }
  const TheoremResult res = theorem_experiment(f, m.params, m.T_grid, m.time.steps, lambda,
                                               m.samples, m.solver, m.seed, m.solve_nonmembers);
  json points = json::array();
  for (const auto& pt : res.points) {
    for (const auto& s : pt.samples)
      rec.add({{"type", "sample"},
               {"T", pt.T},
               {"index", s.index},
               {"event_value", num(s.event_value)},
               {"event_member", s.event_member},
               {"converged", s.converged},
               {"diverged", s.diverged},
               {"geometric", s.geometric},
               {"iterations", s.iterations},
               {"max_ratio", num(s.max_ratio)},
               {"residual", num(s.residual)},
               {"ratios", s.ratios}});
    json p = {{"type", "point"},
              {"T", pt.T},
              {"members", pt.members},
              {"p_hat", pt.p_hat},
              {"ci95", interval(pt.ci)},
              {"member_converged", pt.member_converged},
              {"member_geometric", pt.member_geometric},
              {"conditional_rate", pt.conditional_rate},
              {"max_member_residual", pt.max_member_residual},
              {"max_member_ratio", pt.max_member_ratio}};
    rec.add(p);
  }
  agg["lambda"] = lambda;
  agg["members_contract"] = res.members_contract();
  agg["monotone"] = res.monotone();
  return res.members_contract() && res.monotone();
}

bool run_khinchin(const ExperimentManifest& m, const fs::path&, Recorder& rec, json& agg) {
  std::vector<std::vector<double>> vectors;
  if (!m.coefficients.empty()) {
    vectors.push_back(m.coefficients);
  } else {
    // Coefficient vectors come from a stream keyed apart from the sampling seed.
    for (std::size_t v = 0; v < m.random_vectors; ++v) {
      const RandomizationDraw draw{m.seed ^ 0x9e3779b97f4a7c15ULL, v};
      std::vector<double> c(m.vector_length);
      for (std::size_t n = 0; n < c.size(); ++n) c[n] = draw.gaussian(n);
      vectors.push_back(std::move(c));
    }
  }
  double worst = 0.0;
  for (std::size_t v = 0; v < vectors.size(); ++v) {
    double norm2 = 0.0;
    for (double c : vectors[v]) norm2 += c * c;
    const double l2 = std::sqrt(norm2);
    for (double r : m.r_values) {
      const MomentEstimate est = khinchin_moment(vectors[v], r, m.samples, m.seed);
      const double ratio = l2 > 0.0 ? est.value / (std::sqrt(r) * l2) : 0.0;
      worst = std::max(worst, ratio);
      rec.add({{"type", "point"},
               {"vector", v},
               {"r", r},
               {"l2", l2},
               {"estimate", est.value},
               {"standard_error", est.standard_error},
               {"ratio", ratio}});
    }
  }
  agg["max_ratio"] = worst;
  agg["bound"] = 1.2;
  return worst <= 1.2;
}

}  // namespace

VectorField build_datum(const ExperimentManifest& m) {
  const auto& d = m.data;
  if (d.kind == "canonical") return canonical_datum(m.torus, m.params.s, d.amplitude, d.epsilon);
  if (d.kind == "shear") return shear_flow(m.torus, d.amplitude);
  if (d.kind == "taylor_green") return taylor_green(m.torus, d.amplitude);
  if (d.kind == "smooth") return smooth_datum(m.torus, d.seed, d.kmax, d.amplitude);
  if (d.kind == "zero") return VectorField(m.torus);
  if (d.kind == "file") {
    FieldSnapshot snap = load_field(d.path);
    if (!(snap.field.spec() == m.torus))
      throw ManifestError("data.path: snapshot " + d.path +
                          " does not match the manifest torus (dim/M/G)");
    return std::move(snap.field);
  }
  throw ManifestError("data.source: unknown data source '" + d.kind + "'");
}

json strip_timing(json line) {
  if (line.is_object()) line.erase("wall_clock_seconds");
  return line;
}

RunResult run(const ExperimentManifest& m, std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = m.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  json identity = m.effective;
  identity.erase("output");
  Recorder rec;
  rec.add({{"type", "header"},
           {"kind", to_string(m.kind)},
           {"digest", manifest_digest(identity)},
           {"version", RANDNS_VERSION},
           {"manifest", m.effective}});

  json agg = {{"type", "aggregate"}, {"kind", to_string(m.kind)}};
  bool ok = true;
  switch (m.kind) {
    case ExperimentKind::Randomize: ok = run_randomize(m, dir, rec, agg); break;
    case ExperimentKind::Evolve: ok = run_evolve(m, dir, rec, agg); break;
    case ExperimentKind::Solve: ok = run_solve(m, dir, rec, agg); break;
    case ExperimentKind::Tail: ok = run_tail(m, dir, rec, agg); break;
    case ExperimentKind::Scaling: ok = run_scaling(m, dir, rec, agg); break;
    case ExperimentKind::Theorem: ok = run_theorem(m, dir, rec, agg); break;
    case ExperimentKind::Khinchin: ok = run_khinchin(m, dir, rec, agg); break;
  }
  agg["contract_met"] = ok;
  agg["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rec.add(agg);

  RunResult result;
  result.record_path = dir / "record.ndjson";
  std::ofstream os(result.record_path, std::ios::app);
  if (!os) throw IoError("cannot open " + result.record_path.string() + " for appending");
  for (const auto& line : rec.lines) os << line.dump() << "\n";
  if (!os.flush()) throw IoError("write failed: " + result.record_path.string());

  result.contract_met = ok;
  result.exit_code = ok ? kExitOk : kExitContract;
  result.aggregate = agg;
  if (log) *log << agg.dump(2) << "\n";
  return result;
}

namespace {

std::vector<json> last_block(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open record " + path.string());
  std::vector<json> block;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (j.value("type", "") == "header") block.clear();
    block.push_back(std::move(j));
  }
  if (block.empty() || block.front().value("type", "") != "header")
    throw FormatError(path.string() + ": no record header found");
  return block;
}

}  // namespace

int replay(const fs::path& record, std::ostream& log) {
  const auto original = last_block(record);
  json manifest = original.front().at("manifest");
  std::random_device rd;
  const fs::path scratch =
      fs::temp_directory_path() / ("randns_replay_" + std::to_string(rd()) + std::to_string(rd()));
  manifest["output"]["path"] = scratch.string();
  const ExperimentManifest m = manifest_from_json(manifest);
  run(m, nullptr);
  const auto fresh = last_block(scratch / "record.ndjson");
  std::error_code ec;
  fs::remove_all(scratch, ec);

  std::size_t mismatches = 0;
  if (fresh.size() != original.size()) {
    log << "line count differs: " << original.size() << " recorded, " << fresh.size()
        << " replayed\n";
    ++mismatches;
  }
  for (std::size_t i = 1; i < std::min(fresh.size(), original.size()); ++i) {
    if (strip_timing(fresh[i]) != strip_timing(original[i])) {
      if (mismatches < 5) log << "line " << i + 1 << " differs\n";
      ++mismatches;
    }
  }
  if (original.front().at("digest") != fresh.front().at("digest")) {
    log << "manifest digest differs\n";
    ++mismatches;
  }
  log << (mismatches ? "replay: MISMATCH" : "replay: identical") << " (" << original.size()
      << " lines)\n";
  return mismatches ? kExitContract : kExitOk;
}

}  // namespace randns
