#ifndef FASTFLOW_METRICS_HPP
#define FASTFLOW_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <vector>

#include "agent.hpp"
#include "kinematics.hpp"
#include "lattice.hpp"

namespace fastflow {

/// Per-species (indices 0, 1) and total (index 2) observables of one group.
struct GroupMetrics {
  int n_agents = 0;
  double mean_speed = 0.0;
  double flow = 0.0;
};

inline constexpr int kTotalGroup = kSpeciesCount;

struct MetricsRecord {
  long round = 0;
  std::array<GroupMetrics, kSpeciesCount + 1> groups{};
  double lane_order = 0.0;
  bool deadlock = false;

  const GroupMetrics& total() const { return groups[kTotalGroup]; }
};

struct FdPoint {
  double density = 0.0;
  double mean_flow = 0.0;
  double std_flow = 0.0;
  double mean_speed = 0.0;
  double mean_lane_order = 0.0;
  int n_seeds = 0;
  double deadlock_fraction = 0.0;
};

/// Average Euclidean length of the given displacements; 0 for an empty list.
inline double mean_speed(std::span<const Vec2i> displacements) {
  if (displacements.empty()) return 0.0;
  double sum = 0.0;
  for (Vec2i d : displacements) sum += d.norm();
  return sum / static_cast<double>(displacements.size());
}

/// Mean minimal-image displacement between two position snapshots of the same agents.
inline double mean_speed(const Grid& grid, std::span<const Cell> prev, std::span<const Cell> now) {
  if (prev.size() != now.size()) throw std::invalid_argument("mean_speed: snapshot sizes differ");
  std::vector<Vec2i> d(prev.size());
  for (std::size_t k = 0; k < prev.size(); ++k) d[k] = torus_delta(grid, prev[k], now[k]);
  return mean_speed(d);
}

/// J = sum over species of (n_s / floor_cells) * mean projection of the species' displacement
/// onto its walking direction. Backward steps count negative.
inline double flow(std::span<const Agent> agents, std::size_t floor_cells) {
  if (floor_cells == 0 || agents.empty()) return 0.0;
  std::array<double, kSpeciesCount> projected{};
  std::array<int, kSpeciesCount> count{};
  for (const Agent& a : agents) {
    const int s = species_index(a.species);
    projected[s] += static_cast<double>(nominal_direction(a.species) * a.vel.x);
    ++count[s];
  }
  double j = 0.0;
  for (int s = 0; s < kSpeciesCount; ++s) {
    if (count[s] == 0) continue;
    const double rho = static_cast<double>(count[s]) / static_cast<double>(floor_cells);
    j += rho * (projected[s] / count[s]);
  }
  return j;
}

/// Row-weighted species segregation: sum_r w_r |n+_r - n-_r| / (n+_r + n-_r), w_r = n_r / N.
/// 0 for an empty population.
inline double lane_order_parameter(std::span<const Agent> agents, int height) {
  if (agents.empty()) return 0.0;
  std::vector<std::array<int, 2>> rows(static_cast<std::size_t>(height), {0, 0});
  for (const Agent& a : agents) ++rows[static_cast<std::size_t>(a.pos.y)][species_index(a.species)];
  double y = 0.0;
  const auto n_total = static_cast<double>(agents.size());
  for (const auto& r : rows) {
    const int n = r[0] + r[1];
    if (n == 0) continue;
    y += (n / n_total) * (std::abs(r[0] - r[1]) / static_cast<double>(n));
  }
  return std::clamp(y, 0.0, 1.0);
}

struct DeadlockCriterion {
  int window = 50;
  double eps = 0.05;
};

/// True iff some `window` consecutive entries of the speed history all lie below `eps`.
inline bool deadlock_detector(std::span<const double> speeds, DeadlockCriterion crit = {}) {
  int run = 0;
  for (double v : speeds) {
    run = v < crit.eps ? run + 1 : 0;
    if (run >= crit.window) return true;
  }
  return false;
}

/// Tracks per-round observables of one simulation and the running deadlock state.
class MetricsRecorder {
 public:
  explicit MetricsRecorder(DeadlockCriterion crit = {}) : crit_(crit) {}

  MetricsRecord record(const SimState& state) {
    MetricsRecord m;
    m.round = state.round;
    const auto floor_cells = static_cast<double>(state.lattice->floor_count());
    std::array<double, kSpeciesCount + 1> speed_sum{};
    std::array<double, kSpeciesCount + 1> projected_sum{};
    for (const Agent& a : state.agents) {
      const int s = species_index(a.species);
      const double v = a.vel.norm();
      const double proj = static_cast<double>(nominal_direction(a.species) * a.vel.x);
      ++m.groups[s].n_agents;
      ++m.groups[kTotalGroup].n_agents;
      speed_sum[s] += v;
      speed_sum[kTotalGroup] += v;
      projected_sum[s] += proj;
      projected_sum[kTotalGroup] += proj;
    }
    for (int g = 0; g <= kTotalGroup; ++g) {
      auto& grp = m.groups[g];
      if (grp.n_agents == 0) continue;
      grp.mean_speed = speed_sum[g] / grp.n_agents;
      // rho_s * mean projected speed = projected sum / floor cells
      grp.flow = floor_cells > 0 ? projected_sum[g] / floor_cells : 0.0;
    }
    auto& t = m.groups[kTotalGroup];
    m.lane_order = lane_order_parameter(state.agents, state.grid().height());

    const bool both = m.groups[0].n_agents > 0 && m.groups[1].n_agents > 0;
    run_ = (both && t.mean_speed < crit_.eps) ? run_ + 1 : 0;
    if (run_ >= crit_.window) ever_deadlocked_ = true;
    m.deadlock = run_ >= crit_.window;
    return m;
  }

  bool ever_deadlocked() const { return ever_deadlocked_; }

 private:
  DeadlockCriterion crit_;
  int run_ = 0;
  bool ever_deadlocked_ = false;
};

/// Observables of one run reduced over the rounds after warmup.
struct RunSummary {
  double mean_flow = 0.0;
  double mean_speed = 0.0;
  double mean_lane_order = 0.0;
  bool deadlocked = false;
};

/// Time averages over records with round > warmup. Rounds are 1-based after the first step.
inline RunSummary summarize_run(std::span<const MetricsRecord> records, long warmup, bool deadlocked) {
  RunSummary s;
  s.deadlocked = deadlocked;
  std::size_t n = 0;
  for (const MetricsRecord& r : records) {
    if (r.round <= warmup) continue;
    s.mean_flow += r.total().flow;
    s.mean_speed += r.total().mean_speed;
    s.mean_lane_order += r.lane_order;
    ++n;
  }
  if (n > 0) {
    s.mean_flow /= static_cast<double>(n);
    s.mean_speed /= static_cast<double>(n);
    s.mean_lane_order /= static_cast<double>(n);
  }
  return s;
}

/// Mean and population standard deviation across seeds; deadlocked seeds stay in the sample.
inline FdPoint fd_aggregate(double density, std::span<const RunSummary> runs) {
  FdPoint p;
  p.density = density;
  p.n_seeds = static_cast<int>(runs.size());
  if (runs.empty()) return p;
  const auto n = static_cast<double>(runs.size());
  int deadlocked = 0;
  for (const RunSummary& r : runs) {
    p.mean_flow += r.mean_flow;
    p.mean_speed += r.mean_speed;
    p.mean_lane_order += r.mean_lane_order;
    deadlocked += r.deadlocked;
  }
  p.mean_flow /= n;
  p.mean_speed /= n;
  p.mean_lane_order /= n;
  double var = 0.0;
  for (const RunSummary& r : runs) var += (r.mean_flow - p.mean_flow) * (r.mean_flow - p.mean_flow);
  p.std_flow = std::sqrt(var / n);
  p.deadlock_fraction = deadlocked / n;
  return p;
}

}  // namespace fastflow

#endif  // FASTFLOW_METRICS_HPP
