#ifndef FASTFLOW_GEOMETRY_HPP
#define FASTFLOW_GEOMETRY_HPP

#include <cmath>
#include <compare>
#include <cstdint>

namespace fastflow {

/// Integer lattice coordinate. x runs along the corridor, y across it; row 0 is the first printed row.
struct Cell {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(Cell, Cell) = default;
  friend constexpr auto operator<=>(Cell, Cell) = default;
};

/// Integer displacement, also used for velocities in cells per round.
struct Vec2i {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(Vec2i, Vec2i) = default;

  constexpr bool is_zero() const { return x == 0 && y == 0; }
  constexpr long long norm_sq() const {
    return static_cast<long long>(x) * x + static_cast<long long>(y) * y;
  }
  double norm() const { return std::sqrt(static_cast<double>(norm_sq())); }
};

constexpr long long dot(Vec2i a, Vec2i b) {
  return static_cast<long long>(a.x) * b.x + static_cast<long long>(a.y) * b.y;
}

constexpr long long cross(Vec2i a, Vec2i b) {
  return static_cast<long long>(a.x) * b.y - static_cast<long long>(a.y) * b.x;
}

constexpr Cell operator+(Cell c, Vec2i d) { return {c.x + d.x, c.y + d.y}; }

/// The two walking directions of a counterflow scenario.
enum class Species : std::uint8_t { Rightward = 0, Leftward = 1 };

inline constexpr int kSpeciesCount = 2;

constexpr int species_index(Species s) { return static_cast<int>(s); }

/// +1 for rightward walkers, -1 for leftward walkers.
constexpr int nominal_direction(Species s) { return s == Species::Rightward ? 1 : -1; }

}  // namespace fastflow

#endif  // FASTFLOW_GEOMETRY_HPP
