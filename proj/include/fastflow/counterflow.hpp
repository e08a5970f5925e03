#ifndef FASTFLOW_COUNTERFLOW_HPP
#define FASTFLOW_COUNTERFLOW_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agent.hpp"
#include "lattice.hpp"

namespace fastflow {

/// Which face of the wedge covers the region near the motion axis.
///
/// AsWritten puts the lateral (d_perp) face there; Pyramid swaps the two faces, which gives a
/// rectangular pyramid that is continuous on the whole support.
enum class RegionVariant { AsWritten, Pyramid };

struct CounterflowParams {
  double k_f = 0.8;         ///< coupling strength
  int n_max = 12;           ///< neighbors considered per agent
  double r_max = 15.0;      ///< neighbor search radius (cells)
  double h = 4.0;           ///< potential height scale
  double delta = 0.2;       ///< stationary offset of the height factor
  double a = 2.0;           ///< basewidth across the motion (cells)
  double b = 15.0;          ///< baselength along the motion (cells)
  double fov_half_angle = std::numbers::pi / 2;
  RegionVariant region_variant = RegionVariant::AsWritten;

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("counterflow parameter " + what); };
    if (!(k_f >= 0)) fail("kf must be >= 0");
    if (n_max < 0) fail("n_max must be >= 0");
    if (!(r_max > 0)) fail("rmax must be > 0");
    if (!(h >= 0)) fail("h must be >= 0");
    if (!(delta >= 0)) fail("delta must be >= 0");
    if (!(a > 0)) fail("a must be > 0");
    if (!(b > 0)) fail("b must be > 0");
    if (a > b) fail("a must not exceed b");
    if (!(fov_half_angle > 0 && fov_half_angle <= std::numbers::pi)) fail("fov must lie in (0, pi]");
  }
};

/// One member of an agent's neighbor set, with the emitter frame cached for potential lookups.
struct NeighborRef {
  int agent_id = 0;
  double distance = 0.0;
  int sign = 0;
  Cell origin;          ///< emitter position
  double axis_x = 1.0;  ///< unit vector of the emitter's heading
  double axis_y = 0.0;
  double height = 0.0;  ///< 2h (v/v_max + delta)
};

/// Sign of v_i . v_j; zero when the product vanishes (perpendicular or zero vectors).
constexpr int sign_factor(Vec2i v_i, Vec2i v_j) {
  const long long s = dot(v_i, v_j);
  return (s > 0) - (s < 0);
}

struct FrameOffset {
  double d_par = 0.0;
  double d_perp = 0.0;
};

/// Expresses a world offset in the frame whose +parallel axis is v_j.
inline FrameOffset rotate_to_agent_frame(double axis_x, double axis_y, double dx, double dy) {
  return {dx * axis_x + dy * axis_y, dy * axis_x - dx * axis_y};
}

inline FrameOffset rotate_to_agent_frame(Vec2i v_j, double dx, double dy) {
  if (v_j.is_zero()) throw std::invalid_argument("rotate_to_agent_frame needs a non-zero heading");
  const double n = v_j.norm();
  return rotate_to_agent_frame(v_j.x / n, v_j.y / n, dx, dy);
}

/// 2h (v / v_max + delta)
inline double potential_height(double speed, double v_max, const CounterflowParams& p) {
  return 2.0 * p.h * (speed / v_max + p.delta);
}

/// Face value near the motion axis in the as-written region split.
inline double lateral_face(double height, double d_perp, const CounterflowParams& p) {
  return height * (1.0 - std::abs(d_perp) / p.a);
}

inline double axial_face(double height, double d_par, const CounterflowParams& p) {
  return height * (1.0 - std::abs(d_par) / p.b);
}

/// Wedge potential of an emitter with the given height, evaluated in the emitter's frame.
/// Zero outside the base rectangle |d_par| <= b, |d_perp| <= a.
inline double wedge_potential(double height, double d_par, double d_perp, const CounterflowParams& p) {
  const double ap = std::abs(d_par);
  const double aq = std::abs(d_perp);
  if (ap > p.b || aq > p.a) return 0.0;
  // |d_perp| / |d_par| <= a / b, with 0/0 -> 0 and x/0 -> inf.
  const bool near_axis = aq * p.b <= p.a * ap;
  const bool lateral = (p.region_variant == RegionVariant::AsWritten) == near_axis;
  const double v = lateral ? lateral_face(height, d_perp, p) : axial_face(height, d_par, p);
  return std::max(v, 0.0);
}

inline double comoving_potential(double d_par, double d_perp, double speed, double v_max,
                                 const CounterflowParams& p) {
  return wedge_potential(potential_height(speed, v_max, p), d_par, d_perp, p);
}

/// Heading used for field of view and potential orientation.
///
/// The last displacement if the agent moved; otherwise the steepest-descent step of its static
/// field (ties resolved by the smallest counter-clockwise angle from +x), and on a field minimum
/// the species' nominal direction.
inline Vec2i facing(const Agent& agent, const Lattice& lattice) {
  if (!agent.vel.is_zero()) return agent.vel;
  const StaticField& field = lattice.field(agent.species);
  if (field.is_directional()) return {field.direction(), 0};
  const Grid& grid = lattice.grid();
  Vec2i best{nominal_direction(agent.species), 0};
  double best_slope = 0.0;
  // kMooreSteps is ordered by counter-clockwise angle from +x, so strict > keeps the first tie.
  for (Vec2i step : kMooreSteps) {
    const Cell n = grid.wrap(agent.pos + step);
    if (!grid.is_floor(n)) continue;
    const double slope = field.drop(grid, agent.pos, n) / step.norm();
    if (slope > best_slope) {
      best_slope = slope;
      best = step;
    }
  }
  return best;
}

/// True when `offset` lies within `half_angle` of `heading` (boundary inclusive).
inline bool in_field_of_view(Vec2i heading, Vec2i offset, double half_angle) {
  if (half_angle >= std::numbers::pi) return true;
  const double angle = std::atan2(static_cast<double>(std::llabs(cross(heading, offset))),
                                  static_cast<double>(dot(heading, offset)));
  return angle <= half_angle;
}

/// Fills `out` with the visible, in-view neighbors of agents[i], nearest first.
///
/// Candidates lie within r_max (minimal-image Euclidean) and inside the field of view around
/// the agent's facing; they are sorted by (distance, id) and the first n_max with wall-free line
/// of sight are kept. Line of sight is only tested on the sorted prefix that is needed.
inline void select_neighbors(std::size_t i, std::span<const Agent> agents, const Lattice& lattice,
                             const CounterflowParams& p, std::vector<NeighborRef>& out) {
  out.clear();
  if (p.n_max == 0) return;
  const Grid& grid = lattice.grid();
  const Agent& self = agents[i];
  const Vec2i heading_i = facing(self, lattice);
  const double r2 = p.r_max * p.r_max;

  struct Candidate {
    double distance;
    int id;
    std::size_t index;
  };
  thread_local std::vector<Candidate> cands;
  cands.clear();
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (j == i) continue;
    const Vec2i d = torus_delta(grid, self.pos, agents[j].pos);
    const auto d2 = static_cast<double>(d.norm_sq());
    if (d2 > r2) continue;
    if (!in_field_of_view(heading_i, d, p.fov_half_angle)) continue;
    cands.push_back({std::sqrt(d2), agents[j].id, j});
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& l, const Candidate& r) {
    return l.distance != r.distance ? l.distance < r.distance : l.id < r.id;
  });

  const auto limit = static_cast<std::size_t>(p.n_max);
  for (const Candidate& c : cands) {
    if (out.size() >= limit) break;
    const Agent& other = agents[c.index];
    if (!line_of_sight(grid, self.pos, other.pos)) continue;
    const Vec2i heading_j = facing(other, lattice);
    const double hn = heading_j.norm();
    NeighborRef ref;
    ref.agent_id = other.id;
    ref.distance = c.distance;
    ref.sign = sign_factor(heading_i, heading_j);
    ref.origin = other.pos;
    ref.axis_x = heading_j.x / hn;
    ref.axis_y = heading_j.y / hn;
    ref.height = potential_height(std::min(other.speed(), static_cast<double>(other.v_max)),
                                  static_cast<double>(other.v_max), p);
    out.push_back(ref);
  }
}

inline std::vector<NeighborRef> select_neighbors(std::size_t i, std::span<const Agent> agents,
                                                 const Lattice& lattice, const CounterflowParams& p) {
  std::vector<NeighborRef> out;
  select_neighbors(i, agents, lattice, p, out);
  return out;
}

/// Sum over neighbors of sign_j * P^j(cell), without the coupling.
inline double signed_potential_sum(const Grid& grid, Cell cell, std::span<const NeighborRef> neighbors,
                                   const CounterflowParams& p) {
  double sum = 0.0;
  for (const NeighborRef& n : neighbors) {
    if (n.sign == 0) continue;
    const Vec2i d = torus_delta(grid, n.origin, cell);
    const FrameOffset f = rotate_to_agent_frame(n.axis_x, n.axis_y, d.x, d.y);
    sum += n.sign * wedge_potential(n.height, f.d_par, f.d_perp, p);
  }
  return sum;
}

/// exp(k_f * sum_j sign_j P^j(cell)); exactly 1 for an empty list or k_f = 0.
inline double counterflow_factor(const Grid& grid, Cell cell, std::span<const NeighborRef> neighbors,
                                 const CounterflowParams& p) {
  return std::exp(p.k_f * signed_potential_sum(grid, cell, neighbors, p));
}

}  // namespace fastflow

#endif  // FASTFLOW_COUNTERFLOW_HPP
