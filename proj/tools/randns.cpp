// Command-line front end: one verb per experiment kind, plus `replay`.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "randns/io.hpp"
#include "randns/runner.hpp"

namespace {

struct Overrides {
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> T;
  std::optional<double> lambda;
  std::optional<std::string> out;
};

int execute(const std::string& verb, const Overrides& o) {
  using namespace randns;
  try {
    nlohmann::json j = o.manifest.empty() ? nlohmann::json::object() : read_manifest_json(o.manifest);
    if (!j.is_object()) throw ManifestError("(root): manifest must be a JSON object");
    if (j.contains("kind") && j["kind"] != verb)
      throw ManifestError("kind: manifest says '" + j["kind"].dump() + "' but the verb is '" +
                          verb + "'");
    j["kind"] = verb;
    if (o.seed) j["ensemble"]["seed"] = *o.seed;
    if (o.samples) j["ensemble"]["samples"] = *o.samples;
    if (o.T) j["time"]["T"] = *o.T;
    if (o.lambda) j["ensemble"]["lambda"] = *o.lambda;
    if (o.out) j["output"]["path"] = *o.out;
    const ExperimentManifest m = manifest_from_json(j);
    const RunResult r = run(m, &std::cout);
    std::cerr << "record: " << r.record_path.string() << "\n";
    return r.exit_code;
  } catch (const ManifestError& e) {
    std::cerr << "randns: invalid manifest: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "randns: invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "randns: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-data periodic Navier-Stokes: simulation and statistical checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RANDNS_VERSION);

  Overrides o;
  std::string verb;
  for (const char* name : {"randomize", "evolve", "solve", "tail", "scaling", "theorem", "khinchin"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--manifest", o.manifest, "JSON experiment manifest");
    sub->add_option("--seed", o.seed, "base seed override");
    sub->add_option("--samples", o.samples, "ensemble size override");
    sub->add_option("--T", o.T, "final time override");
    sub->add_option("--lambda", o.lambda, "event threshold override");
    sub->add_option("--out", o.out, "output directory override");
    sub->callback([&verb, name] { verb = name; });
  }
  std::string record;
  auto* rp = app.add_subcommand("replay", "re-run a record from its embedded manifest and compare");
  rp->add_option("record", record, "record.ndjson to replay")->required();
  rp->callback([&verb] { verb = "replay"; });

  CLI11_PARSE(app, argc, argv);

  if (verb == "replay") {
    try {
      return randns::replay(record, std::cout);
    } catch (const randns::ManifestError& e) {
      std::cerr << "randns: invalid manifest in record: " << e.what() << "\n";
      return randns::kExitValidation;
    } catch (const std::exception& e) {
      std::cerr << "randns: " << e.what() << "\n";
      return randns::kExitIo;
    }
  }
  return execute(verb, o);
}
