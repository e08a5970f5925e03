#ifndef FASTFLOW_KINEMATICS_HPP
#define FASTFLOW_KINEMATICS_HPP

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agent.hpp"
#include "counterflow.hpp"
#include "lattice.hpp"
#include "rng.hpp"

namespace fastflow {

struct ModelParams {
  CounterflowParams counterflow;
  double k_s = 2.5;  ///< static floor field coupling
};

/// Cell -> agent slot map; -1 marks a free cell.
class Occupancy {
 public:
  Occupancy() = default;
  explicit Occupancy(const Grid& grid) : slots_(grid.size(), -1) {}

  void reset(const Grid& grid, std::span<const Agent> agents) {
    slots_.assign(grid.size(), -1);
    for (std::size_t k = 0; k < agents.size(); ++k) {
      auto& slot = slots_[grid.index(agents[k].pos)];
      if (slot != -1) throw std::invalid_argument("two agents share a cell");
      slot = static_cast<int>(k);
    }
  }

  int slot(const Grid& grid, Cell c) const { return slots_[grid.index(c)]; }
  bool occupied(const Grid& grid, Cell c) const { return slots_[grid.index(c)] != -1; }

  void move(const Grid& grid, Cell from, Cell to) {
    const int s = slots_[grid.index(from)];
    slots_[grid.index(from)] = -1;
    slots_[grid.index(to)] = s;
  }

 private:
  std::vector<int> slots_;
};

/// Agents reaching a goal cell of their species reappear on their origin edge.
struct RespawnRule {
  bool enabled = false;
  /// Indexed by species: where that species re-enters. Empty means the agent leaves for good.
  std::array<std::vector<Cell>, kSpeciesCount> origin_cells;
};

struct SimState {
  std::shared_ptr<const Lattice> lattice;
  std::vector<Agent> agents;
  Occupancy occupancy;
  long round = 0;
  Rng rng;
  ModelParams params;
  RespawnRule respawn;

  const Grid& grid() const { return lattice->grid(); }

  /// Rebuilds the occupancy map and checks agent invariants.
  void sync() {
    const Grid& g = grid();
    for (const Agent& a : agents) {
      if (!g.is_floor(a.pos)) throw std::invalid_argument("agent " + std::to_string(a.id) + " is not on floor");
      if (a.v_max < 1) throw std::invalid_argument("agent v_max must be >= 1");
    }
    occupancy.reset(g, agents);
  }
};

/// Integer offsets with dx^2 + dy^2 <= v_max^2, ordered by (dy, dx).
inline const std::vector<Vec2i>& reach_offsets(int v_max) {
  thread_local std::vector<std::vector<Vec2i>> cache;
  if (static_cast<std::size_t>(v_max) >= cache.size()) cache.resize(static_cast<std::size_t>(v_max) + 1);
  auto& offsets = cache[static_cast<std::size_t>(v_max)];
  if (offsets.empty()) {
    const long long r2 = static_cast<long long>(v_max) * v_max;
    for (int dy = -v_max; dy <= v_max; ++dy) {
      for (int dx = -v_max; dx <= v_max; ++dx) {
        if (static_cast<long long>(dx) * dx + static_cast<long long>(dy) * dy <= r2) offsets.push_back({dx, dy});
      }
    }
  }
  return offsets;
}

/// Free floor cells within Euclidean radius v_max and wall-free line of sight, plus the agent's own cell.
/// Agents on the way do not hide a cell; they stop the move when it is executed (see advance).
inline void reachable_cells(const Agent& agent, const Grid& grid, const Occupancy& occupancy, std::vector<Cell>& out) {
  out.clear();
  for (Vec2i off : reach_offsets(agent.v_max)) {
    if (off.is_zero()) {
      out.push_back(agent.pos);
      continue;
    }
    const Cell c = grid.wrap(agent.pos + off);
    if (!grid.is_floor(c)) continue;
    // On narrow periodic grids two offsets can alias; keep only the minimal image.
    if (torus_delta(grid, agent.pos, c) != off) continue;
    if (occupancy.occupied(grid, c)) continue;
    if (!line_of_sight(grid, agent.pos, c)) continue;
    out.push_back(c);
  }
}

inline std::vector<Cell> reachable_cells(const Agent& agent, const Grid& grid, const Occupancy& occupancy) {
  std::vector<Cell> out;
  reachable_cells(agent, grid, occupancy, out);
  return out;
}

/// Unnormalized weights exp(k_S (S(pos) - S(c))) * exp(k_f sum_j sign_j P^j(c)), shifted by their
/// common maximum in log space and floored at the smallest normal double. Returns the total.
inline double destination_weights(const Agent& agent, std::span<const Cell> candidates, const Grid& grid,
                                  const StaticField& field, std::span<const NeighborRef> neighbors,
                                  const ModelParams& params, std::vector<double>& weights) {
  weights.resize(candidates.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    double log_w = params.k_s * field.drop(grid, agent.pos, candidates[k]);
    if (!neighbors.empty()) {
      log_w += params.counterflow.k_f * signed_potential_sum(grid, candidates[k], neighbors, params.counterflow);
    }
    if (std::isnan(log_w)) log_w = -std::numeric_limits<double>::infinity();
    weights[k] = log_w;
    top = std::max(top, log_w);
  }
  if (!std::isfinite(top)) top = 0.0;
  double total = 0.0;
  for (double& w : weights) {
    w = std::max(std::exp(w - top), DBL_MIN);
    total += w;
  }
  return total;
}

/// Destination distribution over `candidates` (normalized weights).
inline std::vector<double> destination_probabilities(const Agent& agent, std::span<const Cell> candidates,
                                                     const Grid& grid, const StaticField& field,
                                                     std::span<const NeighborRef> neighbors,
                                                     const ModelParams& params) {
  if (candidates.empty()) throw std::invalid_argument("destination_probabilities needs at least one candidate");
  std::vector<double> w;
  const double total = destination_weights(agent, candidates, grid, field, neighbors, params, w);
  for (double& x : w) x /= total;
  return w;
}

/// Index drawn from unnormalized weights with one uniform variate.
inline std::size_t sample_index(std::span<const double> weights, double total, double u) {
  const double target = u * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cum += weights[k];
    if (target < cum) return k;
  }
  return weights.size() - 1;
}

/// Walks the supercover from `from` toward `to` and returns the last cell before the first
/// occupied one. Agents never pass through each other.
inline Cell last_free_cell(const Grid& grid, const Occupancy& occupancy, Cell from, Cell to) {
  Cell last = from;
  segment_clear(
      grid, from, to,
      [&](Cell p) {
        if (occupancy.occupied(grid, p)) return true;
        last = p;
        return false;
      },
      [](Cell) { return false; });
  return last;
}

/// Full model: floor field plus comoving counterflow potentials.
struct CounterflowModel {
  static constexpr bool kUsesNeighbors = true;
};

/// Floor field only; neighbor selection is never run.
struct BaseModel {
  static constexpr bool kUsesNeighbors = false;
};

namespace detail {

inline void apply_respawn(SimState& state) {
  const Grid& grid = state.grid();
  thread_local std::vector<Cell> free_cells;
  for (std::size_t k = 0; k < state.agents.size();) {
    Agent& a = state.agents[k];
    if (!state.lattice->is_goal(a.species, a.pos)) {
      ++k;
      continue;
    }
    const auto& origin = state.respawn.origin_cells[species_index(a.species)];
    if (origin.empty()) {
      // Nowhere to re-enter: the agent leaves the simulation.
      state.agents.erase(state.agents.begin() + static_cast<std::ptrdiff_t>(k));
      state.occupancy.reset(grid, state.agents);
      continue;
    }
    free_cells.clear();
    for (Cell c : origin) {
      if (!state.occupancy.occupied(grid, c)) free_cells.push_back(c);
    }
    if (!free_cells.empty()) {
      const Cell dest = free_cells[static_cast<std::size_t>(state.rng.below(free_cells.size()))];
      state.occupancy.move(grid, a.pos, dest);
      a.pos = dest;
    }
    ++k;
  }
}

}  // namespace detail

/// One round of random sequential update.
///
/// Agent order is reshuffled every round; each agent then draws exactly one destination against
/// the positions of agents already moved this round. The RNG consumption is identical for both
/// models, so a zero coupling replays the base model bit for bit.
template <class Model = CounterflowModel>
void advance(SimState& state) {
  const Lattice& lattice = *state.lattice;
  const Grid& grid = lattice.grid();
  thread_local std::vector<std::size_t> order;
  thread_local std::vector<NeighborRef> neighbors;
  thread_local std::vector<Cell> candidates;
  thread_local std::vector<double> weights;

  order.resize(state.agents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  state.rng.shuffle(std::span<std::size_t>(order));

  for (std::size_t idx : order) {
    if constexpr (Model::kUsesNeighbors) {
      select_neighbors(idx, state.agents, lattice, state.params.counterflow, neighbors);
    } else {
      neighbors.clear();
    }
    Agent& agent = state.agents[idx];
    reachable_cells(agent, grid, state.occupancy, candidates);
    const double total = destination_weights(agent, candidates, grid, lattice.field(agent.species), neighbors,
                                             state.params, weights);
    Cell dest = candidates[sample_index(weights, total, state.rng.uniform())];
    if (dest != agent.pos) dest = last_free_cell(grid, state.occupancy, agent.pos, dest);
    agent.vel = torus_delta(grid, agent.pos, dest);
    if (dest != agent.pos) {
      state.occupancy.move(grid, agent.pos, dest);
      agent.pos = dest;
    }
  }
  if (state.respawn.enabled) detail::apply_respawn(state);
  ++state.round;
}

template <class Model = CounterflowModel>
SimState step(SimState state) {
  advance<Model>(state);
  return state;
}

}  // namespace fastflow

#endif  // FASTFLOW_KINEMATICS_HPP
