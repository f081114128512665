#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "randns/evolution.hpp"
#include "randns/montecarlo.hpp"
#include "randns/norms.hpp"

namespace randns {

/// Rejected manifest; what() starts with the offending key path.
class ManifestError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind { Randomize, Evolve, Solve, Tail, Scaling, Theorem, Khinchin };

const char* to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& name);

struct DataSource {
  // canonical | file | shear | taylor_green | smooth | zero
  std::string kind = "canonical";
  double amplitude = 1.0;
  double epsilon = 0.01;  // canonical: decay exponent slack
  int kmax = 3;           // smooth
  std::uint64_t seed = 0; // smooth
  std::string path;       // file
};

struct ExperimentManifest {
  ExperimentKind kind = ExperimentKind::Randomize;
  ParameterSet params;
  TorusSpec torus;
  TimeGrid time;
  std::vector<double> T_grid;
  DataSource data;

  std::size_t samples = 1;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;  // randomize/solve: first draw used
  bool randomize_data = false;     // solve/evolve: randomize the datum first

  std::optional<double> lambda;    // theorem: absent = calibrate
  std::vector<double> lambda_grid; // tail: empty = automatic
  Selector selector = Selector::E2;
  double r = 2.0;

  std::vector<double> coefficients;  // khinchin: explicit sequence
  std::size_t random_vectors = 20;   // khinchin: otherwise this many random sequences
  std::size_t vector_length = 16;
  std::vector<double> r_values{2, 4, 8, 16};

  PicardSettings solver;
  int substeps = 1;
  bool solve_nonmembers = true;
  std::size_t calibration_samples = 64;
  std::uint64_t calibration_seed = 0x5eed;
  double safety = 0.5;

  std::string out = "randns_out";
  bool csv = true;

  /// The fully defaulted manifest as JSON; embedded in every record and sufficient
  /// to reproduce the run.
  nlohmann::json effective;
};

/// Parse and validate JSON text. Unknown keys, wrong types and inadmissible
/// (N, s, m) are rejected with the key path in the message.
ExperimentManifest parse_manifest(const std::string& text);
ExperimentManifest manifest_from_json(const nlohmann::json& j);

/// Read a manifest file; I/O errors raise IoError.
nlohmann::json read_manifest_json(const std::string& path);

/// Hex FNV-1a digest of the canonical JSON dump.
std::string manifest_digest(const nlohmann::json& effective);

}  // namespace randns
