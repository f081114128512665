#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "randns/manifest.hpp"

namespace randns {

// Process exit statuses of the front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitContract = 3;

struct RunResult {
  int exit_code = kExitOk;
  bool contract_met = true;
  std::filesystem::path record_path;
  nlohmann::json aggregate;
};

/// Build the datum the manifest describes (before any randomization).
VectorField build_datum(const ExperimentManifest& m);

/// Execute the manifest, appending records to <out>/record.ndjson: one header line
/// embedding the effective manifest, one line per sample or point, one aggregate line.
/// Snapshots and CSV curves land next to the record. log may be null.
RunResult run(const ExperimentManifest& m, std::ostream* log = nullptr);

/// Re-run the last run block of a record file from its embedded manifest (in a scratch
/// directory) and compare every non-timing field. Returns kExitOk when identical and
/// kExitContract when any line differs.
int replay(const std::filesystem::path& record, std::ostream& log);

/// Strip timing fields so records can be compared.
nlohmann::json strip_timing(nlohmann::json line);

}  // namespace randns
