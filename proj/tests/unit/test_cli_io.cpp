#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "randns/io.hpp"
#include "randns/randomization.hpp"
#include "randns/runner.hpp"

using namespace randns;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("randns_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<nlohmann::json> read_lines(const fs::path& p) {
  std::vector<nlohmann::json> out;
  std::ifstream is(p);
  std::string line;
  while (std::getline(is, line)) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("field snapshots") {
  const auto dir = scratch("fields");
  const auto spec = TorusSpec::make(3, 6, 16);
  save_field(dir / "zero.nsrf", VectorField(spec));
  CHECK(load_field(dir / "zero.nsrf").field == VectorField(spec));

  const auto f = testing::random_field(spec, 12);
  save_field(dir / "f.nsrf", f, -0.35);
  const auto back = load_field(dir / "f.nsrf");
  CHECK(back.field == f);
  CHECK(back.s == -0.35);
  CHECK(fs::file_size(dir / "f.nsrf") == 5 + 1 + 4 + 4 + 8 + 1 + 3 * 216 * 16);

  std::string bytes = slurp(dir / "f.nsrf");
  CHECK(bytes.substr(0, 5) == "NSRF1");
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream(dir / "bad.nsrf", std::ios::binary) << bad;
    CHECK_THROWS_AS(load_field(dir / "bad.nsrf"), FormatError);
    bad = bytes;
    bad[4] = '2';
    std::ofstream(dir / "v2.nsrf", std::ios::binary) << bad;
    CHECK_THROWS_WITH_AS(load_field(dir / "v2.nsrf"), doctest::Contains("version"), FormatError);
    std::ofstream(dir / "short.nsrf", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
    CHECK_THROWS_AS(load_field(dir / "short.nsrf"), FormatError);
  }
  CHECK_THROWS_AS(load_field(dir / "missing.nsrf"), IoError);
}

TEST_CASE("trajectory snapshots") {
  const auto dir = scratch("traj");
  const auto spec = TorusSpec::make(2, 8);
  const auto u = heat_trajectory(testing::random_field(spec, 2), TimeGrid::make(0.1, 8));
  save_trajectory(dir / "u.nsrt", u);
  const auto back = load_trajectory(dir / "u.nsrt");
  CHECK(back.grid == u.grid);
  REQUIRE(back.states.size() == u.states.size());
  for (std::size_t j = 0; j < u.states.size(); ++j) CHECK(back.states[j] == u.states[j]);
}

TEST_CASE("manifest parsing") {
  const auto m = parse_manifest(R"({"kind": "tail", "params": {"N": 2, "s": -0.2}})");
  CHECK(m.params.m == 8.0);
  CHECK(m.params.delta == 0.125);
  CHECK(m.samples == 5000);
  CHECK(m.torus.modes == 32);
  CHECK(m.time.steps == 256);
  CHECK(m.selector == Selector::E2);
  CHECK(manifest_from_json(m.effective).effective == m.effective);

  CHECK_THROWS_WITH_AS(parse_manifest(R"({"kind":"tail","params":{"s":-1.5}})"),
                       doctest::Contains("params.s: Sobolev index s = -1.5 violates -1 < s < 0"), ManifestError);
  CHECK_THROWS_WITH_AS(parse_manifest(R"({"kind":"tail","params":{"N":3,"s":-0.1,"m":5}})"),
                       doctest::Contains("(8, 16] for N = 3"), ManifestError);
  CHECK_THROWS_WITH_AS(parse_manifest(R"({"kind":"tail","ensemble":{"sample":3}})"),
                       doctest::Contains("ensemble.sample: unknown key"), ManifestError);
  CHECK_THROWS_WITH_AS(parse_manifest(R"({"kind":"tail","extra":1})"), doctest::Contains("extra: unknown key"),
                       ManifestError);
  CHECK_THROWS_WITH_AS(parse_manifest(R"({"kind":"tail","torus":{"M":"x"}})"),
                       doctest::Contains("torus.M: expected an integer"), ManifestError);
  CHECK_THROWS_WITH_AS(parse_manifest(R"({"kind":"tail","params":{"s":-0.6},"ensemble":{"selector":"E2"}})"),
                       doctest::Contains("ensemble.selector"), ManifestError);
  CHECK_THROWS_WITH_AS(parse_manifest(R"({"kind":"tail","ensemble":{"samples":100}})"),
                       doctest::Contains("ensemble.samples"), ManifestError);
  CHECK_THROWS_WITH_AS(parse_manifest(R"({"kind":"scaling","time":{"T_grid":[0.1,0.05,0.02,0.01]}})"),
                       doctest::Contains("time.T_grid"), ManifestError);
  CHECK_THROWS_WITH_AS(parse_manifest(R"({"kind":"launch"})"), doctest::Contains("kind"), ManifestError);
  CHECK_THROWS_WITH_AS(parse_manifest("{\"kind\": "), doctest::Contains("syntax"), ManifestError);
  CHECK(parse_manifest(R"({"kind":"scaling","params":{"s":-0.6}})").selector == Selector::E1);
}

TEST_CASE("randomize runs are byte-identical") {
  const auto dir = scratch("randomize");
  nlohmann::json j = {{"kind", "randomize"},
                      {"torus", {{"M", 16}}},
                      {"ensemble", {{"seed", 7}}},
                      {"output", {{"path", (dir / "a").string()}}}};
  CHECK(run(manifest_from_json(j)).exit_code == kExitOk);
  j["output"]["path"] = (dir / "b").string();
  CHECK(run(manifest_from_json(j)).exit_code == kExitOk);
  CHECK(slurp(dir / "a" / "field_0.nsrf") == slurp(dir / "b" / "field_0.nsrf"));
  CHECK(load_field(dir / "a" / "field_0.nsrf").field ==
        randomize(build_datum(manifest_from_json(j)), {7, 0}));
  CHECK(replay(dir / "a" / "record.ndjson", std::cout) == kExitOk);
}

TEST_CASE("solve run on the shear datum") {
  const auto dir = scratch("solve");
  nlohmann::json j = {{"kind", "solve"},
                      {"torus", {{"M", 16}}},
                      {"time", {{"J", 32}}},
                      {"data", {{"source", "shear"}}},
                      {"output", {{"path", dir.string()}}}};
  const auto r = run(manifest_from_json(j));
  CHECK(r.exit_code == kExitOk);
  CHECK(r.aggregate["iterations"] == 1);
  CHECK(r.aggregate["residual"].get<double>() <= 1e-8);
  const auto lines = read_lines(r.record_path);
  CHECK(lines.front()["type"] == "header");
  CHECK(lines.front()["manifest"] == manifest_from_json(j).effective);
  CHECK(lines.back()["type"] == "aggregate");
  const auto u = load_trajectory(dir / "solution.nsrt");
  CHECK(u[32] == heat_propagate(shear_flow(TorusSpec::make(2, 16)), 0.1));
}

TEST_CASE("tail run end to end") {
  const auto dir = scratch("tail");
  nlohmann::json j = {{"kind", "tail"},
                      {"torus", {{"M", 8}}},
                      {"time", {{"J", 16}}},
                      {"ensemble", {{"samples", 2000}, {"seed", 3}}},
                      {"output", {{"path", dir.string()}}}};
  const auto r = run(manifest_from_json(j));
  for (const char* key : {"c1", "c2", "r_squared", "window", "flagged"}) CHECK(r.aggregate.contains(key));
  int points = 0;
  for (const auto& line : read_lines(r.record_path))
    if (line["type"] == "point") {
      ++points;
      CHECK(line["ci95"].size() == 2);
    }
  CHECK(points == 24);
  CHECK(fs::exists(dir / "tail.csv"));
  CHECK(replay(r.record_path, std::cout) == kExitOk);

  // A tampered record no longer replays.
  auto lines = read_lines(r.record_path);
  lines[5]["norm"] = 0.0;
  {
    std::ofstream os(dir / "tampered.ndjson");
    for (const auto& l : lines) os << l.dump() << "\n";
  }
  CHECK(replay(dir / "tampered.ndjson", std::cout) == kExitContract);
}

TEST_CASE("khinchin and scaling runs") {
  const auto dir = scratch("khinchin");
  nlohmann::json k = {{"kind", "khinchin"},
                      {"ensemble", {{"samples", 2000}, {"random_vectors", 2}, {"vector_length", 4}}},
                      {"output", {{"path", (dir / "k").string()}}}};
  const auto rk = run(manifest_from_json(k));
  CHECK(rk.aggregate["max_ratio"].get<double>() < 1.2);
  nlohmann::json s = {{"kind", "scaling"},
                      {"torus", {{"M", 8}}},
                      {"time", {{"J", 16}, {"T", 0.2}}},
                      {"ensemble", {{"samples", 100}}},
                      {"output", {{"path", (dir / "s").string()}}}};
  const auto rs = run(manifest_from_json(s));
  CHECK(rs.aggregate.contains("slope"));
  CHECK(fs::exists(dir / "s" / "scaling.csv"));
}

TEST_CASE("file data source") {
  const auto dir = scratch("filedata");
  const auto spec = TorusSpec::make(2, 8);
  save_field(dir / "f.nsrf", taylor_green(spec));
  nlohmann::json j = {{"kind", "evolve"},
                      {"torus", {{"M", 8}}},
                      {"time", {{"J", 16}, {"T", 0.01}}},
                      {"data", {{"source", "file"}, {"path", (dir / "f.nsrf").string()}}},
                      {"output", {{"path", dir.string()}}}};
  CHECK(run(manifest_from_json(j)).exit_code == kExitOk);
  j["torus"]["M"] = 16;
  CHECK_THROWS_AS(run(manifest_from_json(j)), ManifestError);
}
