#ifndef FASTFLOW_EXPERIMENT_HPP
#define FASTFLOW_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "kinematics.hpp"
#include "metrics.hpp"
#include "scenario.hpp"

namespace fastflow {

/// Text frame: '#' wall, '.' empty floor, '>' rightward agent, '<' leftward agent; row 0 first.
inline std::string render(const SimState& state) {
  const Grid& grid = state.grid();
  std::string out;
  out.reserve(static_cast<std::size_t>(grid.width() + 1) * static_cast<std::size_t>(grid.height()));
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const Cell c{x, y};
      const int slot = state.occupancy.slot(grid, c);
      if (slot >= 0) {
        out += state.agents[static_cast<std::size_t>(slot)].species == Species::Rightward ? '>' : '<';
      } else {
        out += grid.is_wall(c) ? '#' : '.';
      }
    }
    out += '\n';
  }
  return out;
}

/// Fixed-point decimal with '.' separator, independent of the global locale.
inline std::string format_fixed(double v, int precision = 6) {
  char buf[64];
  if (v == 0.0) v = 0.0;  // print -0 as 0
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, ptr);
}

using RoundObserver = std::function<void(const SimState&, const MetricsRecord&)>;

struct RunResult {
  std::vector<MetricsRecord> records;  ///< one per round, rounds 1..config.rounds
  bool deadlocked = false;
  RunSummary summary;
};

/// Runs `config.rounds` rounds from `initial`, recording metrics after each round.
template <class Model = CounterflowModel>
RunResult simulate(SimState state, const ScenarioConfig& config, const RoundObserver& observer = {}) {
  RunResult result;
  result.records.reserve(static_cast<std::size_t>(config.rounds));
  MetricsRecorder recorder({config.deadlock_window, config.deadlock_eps});
  for (long r = 0; r < config.rounds; ++r) {
    advance<Model>(state);
    result.records.push_back(recorder.record(state));
    if (observer) observer(state, result.records.back());
  }
  result.deadlocked = recorder.ever_deadlocked();
  result.summary = summarize_run(result.records, config.warmup, result.deadlocked);
  return result;
}

template <class Model = CounterflowModel>
RunResult simulate(const ScenarioConfig& config, const RoundObserver& observer = {}) {
  return simulate<Model>(build_scenario(config), config, observer);
}

inline constexpr std::string_view kMetricsPreamble =
    "# fastflow metrics: 3 rows per round (species = right, left, all); lane_order and deadlock are "
    "population-wide\n";
inline constexpr std::string_view kMetricsHeader = "round,species,n_agents,mean_speed,flow,lane_order,deadlock\n";

inline void append_metrics_rows(std::string& out, const MetricsRecord& m) {
  static constexpr std::string_view names[] = {"right", "left", "all"};
  for (int g = 0; g <= kTotalGroup; ++g) {
    const auto& grp = m.groups[g];
    out += std::to_string(m.round);
    out += ',';
    out += names[g];
    out += ',';
    out += std::to_string(grp.n_agents);
    out += ',';
    out += format_fixed(grp.mean_speed);
    out += ',';
    out += format_fixed(grp.flow);
    out += ',';
    out += format_fixed(m.lane_order);
    out += ',';
    out += m.deadlock ? '1' : '0';
    out += '\n';
  }
}

inline std::string metrics_csv(std::span<const MetricsRecord> records) {
  std::string out(kMetricsPreamble);
  out += kMetricsHeader;
  for (const auto& m : records) append_metrics_rows(out, m);
  return out;
}

/// Parses "0.1,0.2,0.3" or "lo..hi step s" (inclusive, values lo + k s).
inline std::vector<double> parse_value_list(std::string_view text) {
  auto trim = detail::trim;
  auto number = [](std::string_view s) {
    s = detail::trim(s);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw std::invalid_argument("cannot parse '" + std::string(s) + "' as a number");
    }
    return v;
  };
  text = trim(text);
  std::vector<double> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const auto step_pos = text.find("step");
    if (step_pos == std::string_view::npos || step_pos < dots) {
      throw std::invalid_argument("range needs the form 'lo..hi step s'");
    }
    const double lo = number(text.substr(0, dots));
    const double hi = number(text.substr(dots + 2, step_pos - dots - 2));
    const double step = number(text.substr(step_pos + 4));
    if (!(step > 0) || hi < lo) throw std::invalid_argument("range needs step > 0 and hi >= lo");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long k = 0; k < n; ++k) {
      // Round to 12 significant decimals so 0.05 + 5 * 0.05 prints as 0.3.
      const double v = lo + static_cast<double>(k) * step;
      out.push_back(std::round(v * 1e12) / 1e12);
    }
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    out.push_back(number(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

/// Runs `count` independent jobs on up to `jobs` threads. Each job writes only its own slot, so
/// results never depend on scheduling.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

struct FdRequest {
  ScenarioConfig base;
  std::vector<double> densities;
  int seeds = 10;
  int jobs = 1;
  std::uint64_t param_index = 0;
};

/// One fundamental-diagram point per density, each from `seeds` corridor runs. Run seeds are
/// derive_seed(base.seed, param_index, density index, seed index).
template <class Model = CounterflowModel>
std::vector<FdPoint> fundamental_diagram(const FdRequest& req) {
  if (req.seeds < 1) throw std::invalid_argument("fd needs at least one seed");
  const std::size_t n_d = req.densities.size();
  const auto n_s = static_cast<std::size_t>(req.seeds);
  std::vector<RunSummary> summaries(n_d * n_s);
  parallel_for(n_d * n_s, req.jobs, [&](std::size_t k) {
    const std::size_t di = k / n_s;
    const std::size_t si = k % n_s;
    ScenarioConfig c = req.base;
    c.density = req.densities[di];
    c.seed = derive_seed(req.base.seed, req.param_index, di, si);
    summaries[k] = simulate<Model>(c).summary;
  });
  std::vector<FdPoint> points;
  for (std::size_t di = 0; di < n_d; ++di) {
    points.push_back(fd_aggregate(req.densities[di], std::span(summaries).subspan(di * n_s, n_s)));
  }
  return points;
}

inline constexpr std::string_view kFdPreamble = "# std_flow: population standard deviation over seeds\n";
inline constexpr std::string_view kFdColumns =
    "density,mean_flow,std_flow,mean_speed,mean_lane_order,deadlock_fraction,n_seeds";

inline std::string fd_row(const FdPoint& p, char sep) {
  std::string row;
  for (const double v : {p.density, p.mean_flow, p.std_flow, p.mean_speed, p.mean_lane_order, p.deadlock_fraction}) {
    row += format_fixed(v);
    row += sep;
  }
  row += std::to_string(p.n_seeds);
  return row;
}

inline std::string fd_csv(std::span<const FdPoint> points) {
  std::string out(kFdPreamble);
  out += kFdColumns;
  out += '\n';
  for (const auto& p : points) out += fd_row(p, ',') + '\n';
  return out;
}

/// Whitespace-separated twin of fd_csv for gnuplot.
inline std::string fd_dat(std::span<const FdPoint> points) {
  std::string out(kFdPreamble);
  std::string cols(kFdColumns);
  std::replace(cols.begin(), cols.end(), ',', ' ');
  out += "# " + cols + '\n';
  for (const auto& p : points) out += fd_row(p, ' ') + '\n';
  return out;
}

enum class SweepParam { KF, NMax };

inline SweepParam parse_sweep_param(std::string_view name) {
  if (name == "kf") return SweepParam::KF;
  if (name == "n_max") return SweepParam::NMax;
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) + "' (expected kf or n_max)");
}

inline std::string_view to_string(SweepParam p) { return p == SweepParam::KF ? "kf" : "n_max"; }

/// Applies one sweep value to a config; n_max values must be non-negative integers.
inline void apply_sweep_value(ScenarioConfig& c, SweepParam p, double value) {
  if (p == SweepParam::KF) {
    if (!(value >= 0)) throw std::invalid_argument("kf values must be >= 0");
    c.counterflow.k_f = value;
  } else {
    if (!(value >= 0) || value != std::floor(value)) throw std::invalid_argument("n_max values must be integers >= 0");
    c.counterflow.n_max = static_cast<int>(value);
  }
}

inline std::string format_sweep_value(SweepParam p, double value) {
  return p == SweepParam::NMax ? std::to_string(static_cast<long>(value)) : detail::format_double(value);
}

struct SweepCurve {
  double value = 0.0;
  std::vector<FdPoint> points;
};

template <class Model = CounterflowModel>
std::vector<SweepCurve> sweep(const FdRequest& req, SweepParam param, std::span<const double> values) {
  std::vector<SweepCurve> curves;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    FdRequest r = req;
    apply_sweep_value(r.base, param, values[vi]);
    r.param_index = vi;
    curves.push_back({values[vi], fundamental_diagram<Model>(r)});
  }
  return curves;
}

inline std::string sweep_csv(SweepParam param, std::span<const SweepCurve> curves) {
  std::string out(kFdPreamble);
  out += "param,value,";
  out += kFdColumns;
  out += '\n';
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out += std::string(to_string(param)) + ',' + format_sweep_value(param, c.value) + ',' + fd_row(p, ',') + '\n';
    }
  }
  return out;
}

}  // namespace fastflow

#endif  // FASTFLOW_EXPERIMENT_HPP
