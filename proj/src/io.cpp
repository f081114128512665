#include "randns/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace randns {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

namespace {

constexpr char kFieldMagic[5] = {'N', 'S', 'R', 'F', '1'};
constexpr char kTrajectoryMagic[5] = {'N', 'S', 'R', 'T', '1'};

template <class T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is, const char* what) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw FormatError(std::string("truncated snapshot reading ") + what);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void expect_magic(std::istream& is, const char (&magic)[5], const char* kind) {
  char buf[5];
  if (!is.read(buf, 5)) throw FormatError(std::string("truncated ") + kind + " header");
  if (std::memcmp(buf, magic, 4) != 0)
    throw FormatError(std::string("bad ") + kind + " magic (expected " +
                      std::string(magic, 5) + ")");
  if (buf[4] != magic[4])
    throw FormatError(std::string("unsupported ") + kind + " version '" + buf[4] + "'");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string() + " for reading");
  return is;
}

}  // namespace

void write_field(std::ostream& os, const VectorField& f, double s) {
  const auto& spec = f.spec();
  os.write(kFieldMagic, 5);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(spec.dim));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(spec.modes));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(spec.grid));
  put<double>(os, s);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(spec.dim));
  for (int a = 0; a < spec.dim; ++a)
    for (const cplx& z : f.component(a)) {
      put<double>(os, z.real());
      put<double>(os, z.imag());
    }
}

FieldSnapshot read_field(std::istream& is) {
  expect_magic(is, kFieldMagic, "field");
  const int dim = get<std::uint8_t>(is, "dim");
  const auto modes = get<std::uint32_t>(is, "M");
  const auto grid = get<std::uint32_t>(is, "G");
  const double s = get<double>(is, "s");
  const int comps = get<std::uint8_t>(is, "component count");
  if (comps != dim)
    throw FormatError("component count " + std::to_string(comps) + " does not match dim " +
                      std::to_string(dim));
  TorusSpec spec;
  try {
    spec = TorusSpec::make(dim, static_cast<int>(modes), static_cast<int>(grid));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid field header: ") + e.what());
  }
  FieldSnapshot out{VectorField(spec), s};
  for (int a = 0; a < dim; ++a)
    for (cplx& z : out.field.component(a)) {
      const double re = get<double>(is, "coefficients");
      const double im = get<double>(is, "coefficients");
      z = {re, im};
    }
  return out;
}

void save_field(const std::filesystem::path& path, const VectorField& f, double s) {
  auto os = open_out(path);
  write_field(os, f, s);
  if (!os.flush()) throw IoError("write failed: " + path.string());
}

FieldSnapshot load_field(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_field(is);
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& u, double s) {
  auto os = open_out(path);
  os.write(kTrajectoryMagic, 5);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid.steps));
  put<double>(os, u.grid.T);
  for (const auto& state : u.states) write_field(os, state, s);
  if (!os.flush()) throw IoError("write failed: " + path.string());
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  auto is = open_in(path);
  expect_magic(is, kTrajectoryMagic, "trajectory");
  TimeGrid grid;
  grid.steps = static_cast<int>(get<std::uint32_t>(is, "J"));
  grid.T = get<double>(is, "T");
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid trajectory header: ") + e.what());
  }
  Trajectory out;
  out.grid = grid;
  for (int j = 0; j < grid.nodes(); ++j) {
    out.states.push_back(read_field(is).field);
    if (!(out.states.back().spec() == out.states.front().spec()))
      throw FormatError("trajectory records have differing torus specs");
  }
  return out;
}

}  // namespace randns
