#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "randns/trajectory.hpp"

namespace randns {

/// Malformed snapshot: wrong magic/version, truncated payload or inconsistent header.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure; what() names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field with the Sobolev index recorded alongside it.
struct FieldSnapshot {
  VectorField field;
  double s = 0.0;
};

// Field record: "NSRF1", dim u8, M u32, G u32, s f64, component count u8, then per
// component (re, im) f64 pairs in lexicographic k order. All little-endian.
void write_field(std::ostream& os, const VectorField& f, double s = 0.0);
FieldSnapshot read_field(std::istream& is);

void save_field(const std::filesystem::path& path, const VectorField& f, double s = 0.0);
FieldSnapshot load_field(const std::filesystem::path& path);

// Trajectory: "NSRT1", J u32, T f64, then J + 1 field records.
void save_trajectory(const std::filesystem::path& path, const Trajectory& u, double s = 0.0);
Trajectory load_trajectory(const std::filesystem::path& path);

}  // namespace randns
