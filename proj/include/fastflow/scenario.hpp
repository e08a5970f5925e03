#ifndef FASTFLOW_SCENARIO_HPP
#define FASTFLOW_SCENARIO_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kinematics.hpp"
#include "lattice.hpp"

namespace fastflow {

enum class ScenarioKind { CorridorPeriodic, OpenArea, MapFile };

/// Configuration problem tied to a key and, when known, a 1-based line number (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& message)
      : std::runtime_error(format(key, line, message)), key_(std::move(key)), line_(line) {}

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& message) {
    std::string out = "config error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!key.empty()) out += ", key '" + key + "'";
    return out + ": " + message;
  }

  std::string key_;
  int line_;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::CorridorPeriodic;
  std::uint64_t seed = 0;
  int width = 60;
  int height = 10;
  double density = 0.2;
  double split = 0.5;
  int v_max = 3;
  double k_s = 2.5;
  CounterflowParams counterflow;
  long rounds = 2000;
  long warmup = 1500;
  int deadlock_window = 50;
  double deadlock_eps = 0.05;
  std::optional<std::string> map_path;

  friend bool operator==(const ScenarioConfig& l, const ScenarioConfig& r) {
    const auto& a = l.counterflow;
    const auto& b = r.counterflow;
    return l.kind == r.kind && l.seed == r.seed && l.width == r.width && l.height == r.height &&
           l.density == r.density && l.split == r.split && l.v_max == r.v_max && l.k_s == r.k_s &&
           a.k_f == b.k_f && a.n_max == b.n_max && a.r_max == b.r_max && a.h == b.h && a.delta == b.delta &&
           a.a == b.a && a.b == b.b && a.fov_half_angle == b.fov_half_angle &&
           a.region_variant == b.region_variant && l.rounds == r.rounds && l.warmup == r.warmup &&
           l.deadlock_window == r.deadlock_window && l.deadlock_eps == r.deadlock_eps && l.map_path == r.map_path;
  }

  ModelParams model() const { return {counterflow, k_s}; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view text, const std::string& key, int line) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ConfigError(key, line, "cannot parse '" + std::string(text) + "' as a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(key, line, "value must be finite");
  }
  return value;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::CorridorPeriodic: return "corridor";
    case ScenarioKind::OpenArea: return "open_area";
    case ScenarioKind::MapFile: return "map";
  }
  return "corridor";
}

inline std::string_view to_string(RegionVariant v) {
  return v == RegionVariant::AsWritten ? "as_written" : "pyramid";
}

/// Range checks shared by the parser and programmatic construction. `lines` maps keys to source lines.
inline void validate(const ScenarioConfig& c, const std::map<std::string, int>& lines = {}) {
  auto line_of = [&](const char* key) {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  auto require = [&](bool ok, const char* key, const std::string& msg) {
    if (!ok) throw ConfigError(key, line_of(key), msg);
  };
  const auto& p = c.counterflow;
  require(c.width >= 1, "width", "must be >= 1");
  require(c.height >= 1, "height", "must be >= 1");
  if (c.kind == ScenarioKind::CorridorPeriodic) require(c.height >= 3, "height", "corridor needs height >= 3");
  require(c.density >= 0 && c.density <= 1, "density", "must lie in [0, 1]");
  require(c.split >= 0 && c.split <= 1, "split", "must lie in [0, 1]");
  require(c.v_max >= 1, "vmax", "must be >= 1");
  require(c.k_s >= 0, "ks", "must be >= 0");
  require(p.k_f >= 0, "kf", "must be >= 0");
  require(p.n_max >= 0, "n_max", "must be >= 0");
  require(p.r_max > 0, "rmax", "must be > 0");
  require(p.h >= 0, "h", "must be >= 0");
  require(p.delta >= 0, "delta", "must be >= 0");
  require(p.a > 0, "a", "must be > 0");
  require(p.b > 0, "b", "must be > 0");
  require(p.a <= p.b, "a", "must not exceed b");
  require(p.fov_half_angle > 0 && p.fov_half_angle <= std::numbers::pi, "fov", "must lie in (0, pi]");
  require(c.rounds >= 1, "rounds", "must be >= 1");
  require(c.warmup >= 0, "warmup", "must be >= 0");
  require(c.warmup < c.rounds, "warmup", "must be smaller than rounds");
  require(c.deadlock_window >= 1, "deadlock_window", "must be >= 1");
  require(c.deadlock_eps >= 0, "deadlock_eps", "must be >= 0");
  require(c.kind != ScenarioKind::MapFile || c.map_path.has_value(), "map_path", "required for kind = map");
}

/// Parses flat `key = value` text with '#' comments. kind and seed are required; everything
/// else defaults. Unknown keys are rejected.
inline ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig c;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = detail::trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", line_no, "expected 'key = value'");
    const std::string key(detail::trim(raw.substr(0, eq)));
    const std::string_view val = detail::trim(raw.substr(eq + 1));
    if (key.empty()) throw ConfigError("", line_no, "empty key");
    if (seen.contains(key)) throw ConfigError(key, line_no, "duplicate key");
    seen[key] = line_no;

    auto num = [&]<class T>(T& field) { field = detail::parse_number<T>(val, key, line_no); };
    auto& p = c.counterflow;
    if (key == "kind") {
      if (val == "corridor") c.kind = ScenarioKind::CorridorPeriodic;
      else if (val == "open_area") c.kind = ScenarioKind::OpenArea;
      else if (val == "map") c.kind = ScenarioKind::MapFile;
      else throw ConfigError(key, line_no, "expected corridor, open_area or map");
    } else if (key == "seed") num(c.seed);
    else if (key == "width") num(c.width);
    else if (key == "height") num(c.height);
    else if (key == "density") num(c.density);
    else if (key == "split") num(c.split);
    else if (key == "vmax") num(c.v_max);
    else if (key == "ks") num(c.k_s);
    else if (key == "kf") num(p.k_f);
    else if (key == "n_max") num(p.n_max);
    else if (key == "rmax") num(p.r_max);
    else if (key == "h") num(p.h);
    else if (key == "delta") num(p.delta);
    else if (key == "a") num(p.a);
    else if (key == "b") num(p.b);
    else if (key == "fov") num(p.fov_half_angle);
    else if (key == "region_variant") {
      if (val == "as_written") p.region_variant = RegionVariant::AsWritten;
      else if (val == "pyramid") p.region_variant = RegionVariant::Pyramid;
      else throw ConfigError(key, line_no, "expected as_written or pyramid");
    } else if (key == "rounds") num(c.rounds);
    else if (key == "warmup") num(c.warmup);
    else if (key == "deadlock_window") num(c.deadlock_window);
    else if (key == "deadlock_eps") num(c.deadlock_eps);
    else if (key == "map_path") {
      if (val.empty()) throw ConfigError(key, line_no, "empty path");
      c.map_path = std::string(val);
    } else {
      throw ConfigError(key, line_no, "unknown key");
    }
  }
  for (const char* required : {"kind", "seed"}) {
    if (!seen.contains(required)) throw ConfigError(required, 0, "missing required key");
  }
  validate(c, seen);
  return c;
}

/// Writes every key, so parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ScenarioConfig& c) {
  using detail::format_double;
  const auto& p = c.counterflow;
  std::ostringstream out;
  out << "kind = " << to_string(c.kind) << '\n'
      << "seed = " << c.seed << '\n'
      << "width = " << c.width << '\n'
      << "height = " << c.height << '\n'
      << "density = " << format_double(c.density) << '\n'
      << "split = " << format_double(c.split) << '\n'
      << "vmax = " << c.v_max << '\n'
      << "ks = " << format_double(c.k_s) << '\n'
      << "kf = " << format_double(p.k_f) << '\n'
      << "n_max = " << p.n_max << '\n'
      << "rmax = " << format_double(p.r_max) << '\n'
      << "h = " << format_double(p.h) << '\n'
      << "delta = " << format_double(p.delta) << '\n'
      << "a = " << format_double(p.a) << '\n'
      << "b = " << format_double(p.b) << '\n'
      << "fov = " << format_double(p.fov_half_angle) << '\n'
      << "region_variant = " << to_string(p.region_variant) << '\n'
      << "rounds = " << c.rounds << '\n'
      << "warmup = " << c.warmup << '\n'
      << "deadlock_window = " << c.deadlock_window << '\n'
      << "deadlock_eps = " << format_double(c.deadlock_eps) << '\n';
  if (c.map_path) out << "map_path = " << *c.map_path << '\n';
  return out.str();
}

/// Character grid: '#' wall, '.' floor, '>'/'<' floor with a rightward/leftward agent,
/// 'E'/'W' goal cells of the rightward/leftward species.
struct MapSpec {
  std::vector<std::string> rows;
};

struct ParsedMap {
  Grid grid;
  std::vector<std::pair<Cell, Species>> agents;
  std::vector<Cell> east_goals;  ///< goals of the rightward species
  std::vector<Cell> west_goals;  ///< goals of the leftward species
};

inline MapSpec read_map_text(std::string_view text) {
  MapSpec m;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view row = text.substr(pos, nl - pos);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    m.rows.emplace_back(row);
    pos = nl + 1;
  }
  while (!m.rows.empty() && m.rows.back().empty()) m.rows.pop_back();
  return m;
}

inline ParsedMap parse_map(const MapSpec& spec) {
  if (spec.rows.empty()) throw ConfigError("map_path", 0, "map is empty");
  const auto width = spec.rows.front().size();
  if (width == 0) throw ConfigError("map_path", 1, "map row is empty");
  ParsedMap out{Grid(static_cast<int>(width), static_cast<int>(spec.rows.size()), false), {}, {}, {}};
  for (std::size_t y = 0; y < spec.rows.size(); ++y) {
    const auto& row = spec.rows[y];
    const int line = static_cast<int>(y) + 1;
    if (row.size() != width) throw ConfigError("map_path", line, "map is not rectangular");
    for (std::size_t x = 0; x < width; ++x) {
      const Cell c{static_cast<int>(x), static_cast<int>(y)};
      switch (row[x]) {
        case '#': out.grid.set_kind(c, CellKind::Wall); break;
        case '.': break;
        case '>': out.agents.emplace_back(c, Species::Rightward); break;
        case '<': out.agents.emplace_back(c, Species::Leftward); break;
        case 'E': out.east_goals.push_back(c); break;
        case 'W': out.west_goals.push_back(c); break;
        default:
          throw ConfigError("map_path", line, std::string("unexpected map character '") + row[x] + "'");
      }
    }
  }
  return out;
}

namespace detail {

/// Places floor(density * candidates) agents on distinct random cells; the first floor(split * n)
/// placed are rightward.
inline std::vector<Agent> seed_agents(std::vector<Cell> candidates, const ScenarioConfig& c, Rng& rng) {
  const auto n = static_cast<std::size_t>(std::floor(c.density * static_cast<double>(candidates.size()) + 1e-9));
  const auto n_right = static_cast<std::size_t>(std::floor(c.split * static_cast<double>(n) + 1e-9));
  rng.shuffle(std::span<Cell>(candidates));
  std::vector<Agent> agents;
  agents.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Agent a;
    a.id = static_cast<int>(k);
    a.pos = candidates[k];
    a.v_max = c.v_max;
    a.species = k < n_right ? Species::Rightward : Species::Leftward;
    agents.push_back(a);
  }
  return agents;
}

inline std::vector<Cell> floor_cells(const Grid& grid) {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Cell c = grid.cell_at(i);
    if (grid.is_floor(c)) cells.push_back(c);
  }
  return cells;
}

inline SimState assemble(Grid grid, std::vector<Agent> agents, const ScenarioConfig& c, Rng rng) {
  SimState s;
  s.lattice = std::make_shared<const Lattice>(std::move(grid));
  s.agents = std::move(agents);
  s.rng = std::move(rng);
  s.params = c.model();
  s.sync();
  return s;
}

}  // namespace detail

/// Periodic corridor: wall rows at y = 0 and y = height - 1, species walking along +x and -x.
inline SimState build_corridor(const ScenarioConfig& c) {
  if (c.kind != ScenarioKind::CorridorPeriodic) throw ConfigError("kind", 0, "build_corridor needs kind = corridor");
  validate(c);
  Grid grid(c.width, c.height, true);
  for (int x = 0; x < c.width; ++x) {
    grid.set_kind({x, 0}, CellKind::Wall);
    grid.set_kind({x, c.height - 1}, CellKind::Wall);
  }
  grid.set_goal(Species::Rightward, DirectionalGoal{1});
  grid.set_goal(Species::Leftward, DirectionalGoal{-1});
  Rng rng(c.seed);
  auto agents = detail::seed_agents(detail::floor_cells(grid), c, rng);
  return detail::assemble(std::move(grid), std::move(agents), c, std::move(rng));
}

/// Open rectangle without walls. Rightward walkers aim for the right edge column, leftward ones
/// for the left edge column; arrivals re-enter on their origin edge.
inline SimState build_open_area(const ScenarioConfig& c) {
  if (c.kind != ScenarioKind::OpenArea) throw ConfigError("kind", 0, "build_open_area needs kind = open_area");
  validate(c);
  if (c.width < 2) throw ConfigError("width", 0, "open area needs width >= 2");
  Grid grid(c.width, c.height, false);
  GoalCells right_edge;
  GoalCells left_edge;
  for (int y = 0; y < c.height; ++y) {
    right_edge.cells.push_back({c.width - 1, y});
    left_edge.cells.push_back({0, y});
  }
  RespawnRule respawn;
  respawn.enabled = true;
  respawn.origin_cells[species_index(Species::Rightward)] = left_edge.cells;
  respawn.origin_cells[species_index(Species::Leftward)] = right_edge.cells;
  grid.set_goal(Species::Rightward, right_edge);
  grid.set_goal(Species::Leftward, left_edge);
  Rng rng(c.seed);
  auto agents = detail::seed_agents(detail::floor_cells(grid), c, rng);
  SimState s = detail::assemble(std::move(grid), std::move(agents), c, std::move(rng));
  s.respawn = std::move(respawn);
  return s;
}

/// Map-defined geometry. Agents come from '>'/'<' characters, or from density/split seeding
/// when the map has none. Without 'E'/'W' goals the floor cells of the right/left edge columns
/// serve as goals; each species re-enters on the other species' goal cells.
inline SimState build_from_map(const ScenarioConfig& c, const MapSpec& map) {
  validate(c);
  ParsedMap pm = parse_map(map);
  Grid& grid = pm.grid;
  auto edge = [&](int x) {
    std::vector<Cell> cells;
    for (int y = 0; y < grid.height(); ++y) {
      if (grid.is_floor({x, y})) cells.push_back({x, y});
    }
    return cells;
  };
  if (pm.east_goals.empty()) pm.east_goals = edge(grid.width() - 1);
  if (pm.west_goals.empty()) pm.west_goals = edge(0);
  if (pm.east_goals.empty() || pm.west_goals.empty()) {
    throw ConfigError("map_path", 0, "map has no reachable goal cells");
  }
  grid.set_goal(Species::Rightward, GoalCells{pm.east_goals});
  grid.set_goal(Species::Leftward, GoalCells{pm.west_goals});

  Rng rng(c.seed);
  std::vector<Agent> agents;
  if (pm.agents.empty()) {
    agents = detail::seed_agents(detail::floor_cells(grid), c, rng);
  } else {
    for (const auto& [cell, species] : pm.agents) {
      Agent a;
      a.id = static_cast<int>(agents.size());
      a.pos = cell;
      a.v_max = c.v_max;
      a.species = species;
      agents.push_back(a);
    }
  }
  RespawnRule respawn;
  respawn.enabled = true;
  respawn.origin_cells[species_index(Species::Rightward)] = pm.west_goals;
  respawn.origin_cells[species_index(Species::Leftward)] = pm.east_goals;
  SimState s;
  try {
    s = detail::assemble(std::move(grid), std::move(agents), c, std::move(rng));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("map_path", 0, e.what());
  }
  s.respawn = std::move(respawn);
  return s;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno ? errno : ENOENT, std::generic_category(), "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Builds the initial state for any scenario kind. Map paths are read as given.
inline SimState build_scenario(const ScenarioConfig& c) {
  switch (c.kind) {
    case ScenarioKind::CorridorPeriodic: return build_corridor(c);
    case ScenarioKind::OpenArea: return build_open_area(c);
    case ScenarioKind::MapFile: return build_from_map(c, read_map_text(read_text_file(*c.map_path)));
  }
  throw ConfigError("kind", 0, "unsupported scenario kind");
}

}  // namespace fastflow

#endif  // FASTFLOW_SCENARIO_HPP
