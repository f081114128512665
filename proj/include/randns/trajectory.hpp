#pragma once

#include <vector>

#include "randns/spectral.hpp"

namespace randns {

/// Uniform nodes t_j = j T / J on [0, T].
struct TimeGrid {
  double T = 0.1;
  int steps = 64;  // J

  static TimeGrid make(double T, int steps);
  void validate() const;

  double step() const { return T / steps; }
  double node(int j) const { return j == steps ? T : T * j / steps; }
  int nodes() const { return steps + 1; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// A field sampled at every node of a TimeGrid.
struct Trajectory {
  TimeGrid grid;
  std::vector<VectorField> states;

  Trajectory() = default;
  Trajectory(TimeGrid g, const TorusSpec& spec);

  const TorusSpec& spec() const { return states.front().spec(); }
  VectorField& operator[](int j) { return states[j]; }
  const VectorField& operator[](int j) const { return states[j]; }

  Trajectory& operator+=(const Trajectory& other);
  Trajectory& operator-=(const Trajectory& other);
  Trajectory& operator*=(double c);
  friend Trajectory operator+(Trajectory a, const Trajectory& b) { return a += b; }
  friend Trajectory operator-(Trajectory a, const Trajectory& b) { return a -= b; }
  friend Trajectory operator*(double c, Trajectory a) { return a *= c; }
};

/// t -> e^{t Delta} f on the grid.
Trajectory heat_trajectory(const VectorField& f, const TimeGrid& grid);

/// A trajectory whose every node holds f.
Trajectory constant_trajectory(const VectorField& f, const TimeGrid& grid);

}  // namespace randns
