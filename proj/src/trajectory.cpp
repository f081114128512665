#include "randns/trajectory.hpp"

#include <cmath>
#include <string>

namespace randns {

TimeGrid TimeGrid::make(double T, int steps) {
  TimeGrid g{T, steps};
  g.validate();
  return g;
}

void TimeGrid::validate() const {
  if (!(T > 0.0) || !(T <= 1.0))
    throw std::invalid_argument("time horizon must satisfy 0 < T <= 1, got " + std::to_string(T));
  if (steps < 8) throw std::invalid_argument("time grid needs J >= 8 steps, got " + std::to_string(steps));
}

Trajectory::Trajectory(TimeGrid g, const TorusSpec& spec)
    : grid(g), states(static_cast<std::size_t>(g.nodes()), VectorField(spec)) {}

namespace {
void check_compatible(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid == b.grid) || a.states.size() != b.states.size())
    throw std::invalid_argument("trajectory time grids differ");
}
}  // namespace

Trajectory& Trajectory::operator+=(const Trajectory& other) {
  check_compatible(*this, other);
  for (std::size_t j = 0; j < states.size(); ++j) states[j] += other.states[j];
  return *this;
}

Trajectory& Trajectory::operator-=(const Trajectory& other) {
  check_compatible(*this, other);
  for (std::size_t j = 0; j < states.size(); ++j) states[j] -= other.states[j];
  return *this;
}

Trajectory& Trajectory::operator*=(double c) {
  for (auto& s : states) s *= c;
  return *this;
}

Trajectory heat_trajectory(const VectorField& f, const TimeGrid& grid) {
  grid.validate();
  Trajectory out;
  out.grid = grid;
  out.states.reserve(grid.nodes());
  for (int j = 0; j < grid.nodes(); ++j) out.states.push_back(heat_propagate(f, grid.node(j)));
  return out;
}

Trajectory constant_trajectory(const VectorField& f, const TimeGrid& grid) {
  grid.validate();
  Trajectory out;
  out.grid = grid;
  out.states.assign(grid.nodes(), f);
  return out;
}

}  // namespace randns
