#ifndef FASTFLOW_TOOLS_COMMANDS_HPP
#define FASTFLOW_TOOLS_COMMANDS_HPP

// Subcommand bodies of the fastflow CLI, separated from argument parsing so tests can drive them.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "fastflow/fastflow.hpp"

namespace fastflow::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kIoError = 2 };

/// I/O failure carrying the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads a config file; map_path entries resolve relative to the config's directory.
inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path.string());
  } catch (const std::system_error&) {
    throw IoError("cannot read config file '" + path.string() + "'");
  }
  ScenarioConfig c = parse_config(text);
  if (c.map_path && std::filesystem::path(*c.map_path).is_relative()) {
    c.map_path = (path.parent_path() / *c.map_path).lexically_normal().string();
  }
  if (c.map_path && !std::filesystem::exists(*c.map_path)) {
    throw IoError("cannot read map file '" + *c.map_path + "'");
  }
  return c;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

inline void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

/// Maps exceptions onto exit codes and prints one diagnostic line.
template <class Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "fastflow: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "fastflow: " << e.what() << '\n';
    return kIoError;
  } catch (const std::invalid_argument& e) {
    err << "fastflow: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::system_error& e) {
    err << "fastflow: " << e.what() << '\n';
    return kIoError;
  }
}

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  long snapshot_every = 0;
};

inline int run(const RunOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioConfig c = load_config(opt.config);
    if (opt.seed) c.seed = *opt.seed;
    make_dir(opt.out);
    const auto frames = opt.out / "frames";
    if (opt.snapshot_every > 0) make_dir(frames);

    SimState initial = build_scenario(c);
    RoundObserver observer;
    if (opt.snapshot_every > 0) {
      write_file(frames / "000000.txt", render(initial));
      observer = [&](const SimState& s, const MetricsRecord&) {
        if (s.round % opt.snapshot_every != 0) return;
        char name[32];
        std::snprintf(name, sizeof name, "%06ld.txt", s.round);
        write_file(frames / name, render(s));
      };
    }
    const RunResult result = simulate(std::move(initial), c, observer);
    write_file(opt.out / "metrics.csv", metrics_csv(result.records));
    log << "rounds=" << c.rounds << " agents=" << result.records.back().total().n_agents
        << " mean_flow=" << format_fixed(result.summary.mean_flow)
        << " mean_speed=" << format_fixed(result.summary.mean_speed)
        << " mean_lane_order=" << format_fixed(result.summary.mean_lane_order)
        << " deadlock=" << (result.deadlocked ? 1 : 0) << '\n';
    return kOk;
  });
}

/// Worker count: explicit flag, else FASTFLOW_JOBS, else 1.
inline int resolve_jobs(std::optional<int> flag) {
  if (flag) return std::max(1, *flag);
  if (const char* env = std::getenv("FASTFLOW_JOBS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

struct FdOptions {
  std::filesystem::path config;
  std::string densities;
  int seeds = 10;
  std::filesystem::path out = ".";
  std::optional<int> jobs;
};

inline FdRequest make_request(const ScenarioConfig& c, const FdOptions& opt) {
  FdRequest req;
  req.base = c;
  try {
    req.densities = parse_value_list(opt.densities);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("--densities", 0, e.what());
  }
  for (double d : req.densities) {
    if (!(d >= 0 && d <= 1)) throw ConfigError("--densities", 0, "densities must lie in [0, 1]");
  }
  if (opt.seeds < 1) throw ConfigError("--seeds", 0, "must be >= 1");
  req.seeds = opt.seeds;
  req.jobs = resolve_jobs(opt.jobs);
  return req;
}

inline int fd(const FdOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig c = load_config(opt.config);
    const FdRequest req = make_request(c, opt);
    make_dir(opt.out);
    const auto points = fundamental_diagram(req);
    write_file(opt.out / "fd.csv", fd_csv(points));
    write_file(opt.out / "fd.dat", fd_dat(points));
    log << "densities=" << points.size() << " seeds=" << req.seeds
        << " simulations=" << points.size() * static_cast<std::size_t>(req.seeds) << '\n';
    return kOk;
  });
}

struct SweepOptions {
  FdOptions fd;
  std::string param;
  std::string values;
};

inline int sweep(const SweepOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    SweepParam param;
    try {
      param = parse_sweep_param(opt.param);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--param", 0, e.what());
    }
    const ScenarioConfig c = load_config(opt.fd.config);
    const FdRequest req = make_request(c, opt.fd);
    std::vector<double> values;
    try {
      values = parse_value_list(opt.values);
      ScenarioConfig probe = c;
      for (double v : values) apply_sweep_value(probe, param, v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--values", 0, e.what());
    }
    make_dir(opt.fd.out);
    const auto curves = fastflow::sweep(req, param, values);
    for (const auto& curve : curves) {
      const std::string stem = "fd_" + std::string(to_string(param)) + "_" + format_sweep_value(param, curve.value);
      write_file(opt.fd.out / (stem + ".csv"), fd_csv(curve.points));
    }
    write_file(opt.fd.out / "sweep.csv", sweep_csv(param, curves));
    log << "param=" << to_string(param) << " values=" << curves.size() << " densities=" << req.densities.size()
        << " seeds=" << req.seeds << '\n';
    return kOk;
  });
}

struct RenderOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  long rounds = 0;
};

inline int render_frame(const RenderOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioConfig c = load_config(opt.config);
    if (opt.seed) c.seed = *opt.seed;
    if (opt.rounds < 0) throw ConfigError("--rounds", 0, "must be >= 0");
    SimState s = build_scenario(c);
    for (long r = 0; r < opt.rounds; ++r) advance(s);
    out << render(s);
    return kOk;
  });
}

}  // namespace fastflow::cli

#endif  // FASTFLOW_TOOLS_COMMANDS_HPP
