#ifndef FASTFLOW_LATTICE_HPP
#define FASTFLOW_LATTICE_HPP

#include <array>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <memory>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "geometry.hpp"

namespace fastflow {

enum class CellKind : std::uint8_t { Floor, Wall };

/// Goal of a species in a periodic corridor: walk along +x (direction = 1) or -x (direction = -1).
struct DirectionalGoal {
  int direction = 1;
};

/// Goal of a species on a bounded map: any of the listed floor cells.
struct GoalCells {
  std::vector<Cell> cells;
};

using GoalSpec = std::variant<DirectionalGoal, GoalCells>;

class Grid {
 public:
  Grid(int width, int height, bool periodic_x = false)
      : width_(width), height_(height), periodic_x_(periodic_x) {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("grid dimensions must be at least 1x1, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
    }
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), CellKind::Floor);
    goals_[0] = DirectionalGoal{1};
    goals_[1] = DirectionalGoal{-1};
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool periodic_x() const { return periodic_x_; }
  std::size_t size() const { return cells_.size(); }

  bool contains(Cell c) const { return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_; }

  /// Maps x onto [0, width) on periodic grids; identity otherwise.
  Cell wrap(Cell c) const {
    if (periodic_x_) {
      c.x %= width_;
      if (c.x < 0) c.x += width_;
    }
    return c;
  }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x);
  }
  Cell cell_at(std::size_t idx) const {
    return {static_cast<int>(idx % static_cast<std::size_t>(width_)),
            static_cast<int>(idx / static_cast<std::size_t>(width_))};
  }

  CellKind kind(Cell c) const { return cells_[index(c)]; }
  bool is_floor(Cell c) const { return contains(c) && cells_[index(c)] == CellKind::Floor; }
  bool is_wall(Cell c) const { return !is_floor(c); }

  void set_kind(Cell c, CellKind k) {
    if (!contains(c)) throw std::out_of_range("cell outside grid");
    cells_[index(c)] = k;
  }

  std::size_t floor_count() const {
    std::size_t n = 0;
    for (auto k : cells_) n += (k == CellKind::Floor);
    return n;
  }

  const GoalSpec& goal(Species s) const { return goals_[species_index(s)]; }
  void set_goal(Species s, GoalSpec g) { goals_[species_index(s)] = std::move(g); }

  /// Throws std::invalid_argument if a goal invariant is broken.
  void validate() const {
    for (int s = 0; s < kSpeciesCount; ++s) {
      if (const auto* gc = std::get_if<GoalCells>(&goals_[s])) {
        if (periodic_x_) throw std::invalid_argument("periodic grids take directional goals only");
        for (Cell c : gc->cells) {
          if (!is_floor(c)) {
            throw std::invalid_argument("goal cell (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                                        ") is not a floor cell");
          }
        }
      } else if (std::abs(std::get<DirectionalGoal>(goals_[s]).direction) != 1) {
        throw std::invalid_argument("directional goal must be +1 or -1");
      }
    }
  }

 private:
  int width_;
  int height_;
  bool periodic_x_;
  std::vector<CellKind> cells_;
  std::array<GoalSpec, kSpeciesCount> goals_;
};

/// Minimal-image displacement from `from` to `to`. On a periodic axis dx lies in (-width/2, width/2].
inline Vec2i torus_delta(const Grid& grid, Cell from, Cell to) {
  int dx = to.x - from.x;
  if (grid.periodic_x()) {
    const int w = grid.width();
    dx %= w;
    if (dx < 0) dx += w;
    if (2 * dx > w) dx -= w;
  }
  return {dx, to.y - from.y};
}

/// Walks every cell whose closed square meets the segment between the centers of `from` and
/// `to` (minimal image), excluding `from` itself, and returns false on the first cell for which
/// `blocked` holds. A segment through a lattice corner visits both cells sharing that corner.
/// The walk is exact integer arithmetic and therefore symmetric in its endpoints.
template <class BlockedFn, class CornerFn>
bool segment_clear(const Grid& grid, Cell from, Cell to, BlockedFn&& blocked, CornerFn&& corner_blocked) {
  const Vec2i d = torus_delta(grid, from, to);
  const int nx = std::abs(d.x);
  const int ny = std::abs(d.y);
  const int sx = d.x > 0 ? 1 : -1;
  const int sy = d.y > 0 ? 1 : -1;

  Cell cur = from;
  int ix = 0;
  int iy = 0;
  while (ix < nx || iy < ny) {
    // Compare where the segment leaves the current column versus the current row:
    // (1 + 2 ix) / 2 nx against (1 + 2 iy) / 2 ny, cross-multiplied.
    const long long decision =
        static_cast<long long>(1 + 2 * ix) * ny - static_cast<long long>(1 + 2 * iy) * nx;
    if (decision == 0) {
      if (corner_blocked(grid.wrap({cur.x + sx, cur.y})) || corner_blocked(grid.wrap({cur.x, cur.y + sy}))) return false;
      cur.x += sx;
      cur.y += sy;
      ++ix;
      ++iy;
    } else if (decision < 0) {
      cur.x += sx;
      ++ix;
    } else {
      cur.y += sy;
      ++iy;
    }
    if (blocked(grid.wrap(cur))) return false;
  }
  return true;
}

/// Wall-only visibility between two floor cells; a cell blocks when its closed square meets the
/// straight segment between the two centers.
inline bool line_of_sight(const Grid& grid, Cell from, Cell to) {
  if (!grid.is_floor(from) || !grid.is_floor(to)) return false;
  auto wall = [&](Cell c) { return grid.is_wall(c); };
  return segment_clear(grid, from, to, wall, wall);
}

/// Distance of the form straight + diagonal * sqrt(2), compared exactly.
struct OctileLength {
  int straight = 0;
  int diagonal = 0;

  double value() const { return straight + diagonal * std::numbers::sqrt2; }

  friend bool operator==(OctileLength, OctileLength) = default;

  friend bool operator<(OctileLength a, OctileLength b) {
    // a.s + a.d r < b.s + b.d r  with r = sqrt(2)  <=>  ds < dd r
    const long long ds = static_cast<long long>(a.straight) - b.straight;
    const long long dd = static_cast<long long>(b.diagonal) - a.diagonal;
    if (dd >= 0 && ds < 0) return true;
    if (dd <= 0 && ds >= 0) return false;
    if (dd > 0) return ds * ds < 2 * dd * dd;  // ds >= 0
    return ds * ds > 2 * dd * dd;              // ds < 0, dd < 0
  }
};

/// Per-species floor field: distance toward the species' goal.
class StaticField {
 public:
  static constexpr double kUnreachable = std::numeric_limits<double>::infinity();

  static StaticField directional(const Grid& grid, int direction) {
    StaticField f;
    f.direction_ = direction;
    f.values_.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Cell c = grid.cell_at(i);
      f.values_[i] = grid.is_floor(c) ? -static_cast<double>(direction) * c.x : kUnreachable;
    }
    return f;
  }

  static StaticField from_values(std::vector<double> values) {
    StaticField f;
    f.values_ = std::move(values);
    return f;
  }

  bool is_directional() const { return direction_ != 0; }
  int direction() const { return direction_; }

  double value(const Grid& grid, Cell c) const { return values_[grid.index(c)]; }
  bool reachable(const Grid& grid, Cell c) const { return values_[grid.index(c)] != kUnreachable; }
  const std::vector<double>& values() const { return values_; }

  /// S(from) - S(to). Directional fields use the minimal-image step, so the ramp never
  /// jumps across the periodic seam. Moves out of an unreachable cell see a flat field.
  double drop(const Grid& grid, Cell from, Cell to) const {
    if (direction_ != 0) return static_cast<double>(direction_) * torus_delta(grid, from, to).x;
    const double s_from = values_[grid.index(from)];
    if (s_from == kUnreachable) return 0.0;
    const double s_to = values_[grid.index(to)];
    if (s_to == kUnreachable) return -kUnreachable;
    return s_from - s_to;
  }

 private:
  int direction_ = 0;
  std::vector<double> values_;
};

inline constexpr std::array<Vec2i, 8> kMooreSteps{
    Vec2i{1, 0}, Vec2i{1, 1}, Vec2i{0, 1}, Vec2i{-1, 1}, Vec2i{-1, 0}, Vec2i{-1, -1}, Vec2i{0, -1}, Vec2i{1, -1}};

/// Exact 8-connected shortest-path distance over floor cells (straight step 1, diagonal sqrt 2).
inline StaticField build_static_field(const Grid& grid, Species species) {
  const GoalSpec& goal = grid.goal(species);
  if (const auto* dir = std::get_if<DirectionalGoal>(&goal)) {
    if (!grid.periodic_x()) {
      throw std::invalid_argument("directional goals require a periodic corridor");
    }
    return StaticField::directional(grid, dir->direction);
  }
  const auto& goals = std::get<GoalCells>(goal).cells;
  if (goals.empty()) {
    throw std::invalid_argument("species has no goal cells: every floor cell is unreachable");
  }

  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<OctileLength> dist(grid.size(), OctileLength{kInf, 0});
  std::vector<bool> settled(grid.size(), false);
  struct Entry {
    OctileLength d;
    std::size_t idx;
  };
  auto later = [](const Entry& a, const Entry& b) {
    if (a.d == b.d) return a.idx > b.idx;
    return b.d < a.d;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(later)> open(later);
  for (Cell g : goals) {
    if (!grid.is_floor(g)) throw std::invalid_argument("goal cell is not a floor cell");
    dist[grid.index(g)] = {};
    open.push({{}, grid.index(g)});
  }
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (settled[e.idx]) continue;
    settled[e.idx] = true;
    const Cell c = grid.cell_at(e.idx);
    for (Vec2i step : kMooreSteps) {
      const Cell n = grid.wrap(c + step);
      if (!grid.is_floor(n)) continue;
      const std::size_t ni = grid.index(n);
      if (settled[ni]) continue;
      OctileLength cand = e.d;
      (step.x != 0 && step.y != 0) ? ++cand.diagonal : ++cand.straight;
      if (dist[ni].straight == kInf || cand < dist[ni]) {
        dist[ni] = cand;
        open.push({cand, ni});
      }
    }
  }

  std::vector<double> values(grid.size(), StaticField::kUnreachable);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (settled[i]) values[i] = dist[i].value();
  }
  return StaticField::from_values(std::move(values));
}

/// Geometry plus one static field per species. Immutable once built and shared between states.
class Lattice {
 public:
  explicit Lattice(Grid grid) : grid_(std::move(grid)) {
    grid_.validate();
    floor_count_ = grid_.floor_count();
    for (int s = 0; s < kSpeciesCount; ++s) {
      const auto species = static_cast<Species>(s);
      fields_[s] = build_static_field(grid_, species);
      goal_mask_[s].assign(grid_.size(), false);
      if (const auto* gc = std::get_if<GoalCells>(&grid_.goal(species))) {
        for (Cell c : gc->cells) goal_mask_[s][grid_.index(c)] = true;
      }
    }
  }

  const Grid& grid() const { return grid_; }
  const StaticField& field(Species s) const { return fields_[species_index(s)]; }
  bool is_goal(Species s, Cell c) const { return goal_mask_[species_index(s)][grid_.index(c)]; }
  std::size_t floor_count() const { return floor_count_; }

 private:
  Grid grid_;
  std::size_t floor_count_ = 0;
  std::array<StaticField, kSpeciesCount> fields_;
  std::array<std::vector<bool>, kSpeciesCount> goal_mask_;
};

}  // namespace fastflow

#endif  // FASTFLOW_LATTICE_HPP
