#include <gtest/gtest.h>

#include <set>

#include "fastflow/fastflow.hpp"

namespace fastflow {
namespace {

TEST(ParseConfig, DefaultsFromKindAndSeed) {
  const ScenarioConfig c = parse_config("kind = corridor\nseed = 7\n");
  EXPECT_EQ(c.kind, ScenarioKind::CorridorPeriodic);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.counterflow.k_f, 0.8);
  EXPECT_EQ(c.counterflow.n_max, 12);
  EXPECT_EQ(c.counterflow.h, 4.0);
  EXPECT_EQ(c.counterflow.delta, 0.2);
  EXPECT_EQ(c.counterflow.a, 2.0);
  EXPECT_EQ(c.counterflow.b, 15.0);
  EXPECT_EQ(c.counterflow.r_max, 15.0);
  EXPECT_EQ(c.counterflow.fov_half_angle, std::numbers::pi / 2);
  EXPECT_EQ(c.counterflow.region_variant, RegionVariant::AsWritten);
  EXPECT_EQ(c.v_max, 3);
}

TEST(ParseConfig, SingleOverride) {
  const ScenarioConfig c = parse_config("# neighbors\nkind = corridor\nseed = 1\nn_max = 6  # fewer\n");
  ScenarioConfig want;
  want.seed = 1;
  want.counterflow.n_max = 6;
  EXPECT_EQ(c, want);
}

void expect_error(const std::string& text, const std::string& key, int line) {
  try {
    parse_config(text);
    FAIL() << "no error for:\n" << text;
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), key) << e.what();
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_NE(std::string(e.what()).find(key), std::string::npos);
  }
}

TEST(ParseConfig, ErrorsNameKeyAndLine) {
  expect_error("kind = corridor\nseed = 1\nkf = -1\n", "kf", 3);
  expect_error("kind = corridor\nseed = 1\nkff = 1\n", "kff", 3);
  expect_error("kind = corridor\nkf = 0.5\n", "seed", 0);
  expect_error("seed = 3\n", "kind", 0);
  expect_error("kind = corridor\nseed = 1\nwidth = ten\n", "width", 3);
  expect_error("kind = tunnel\nseed = 1\n", "kind", 1);
  expect_error("kind = corridor\nseed = 1\nseed = 2\n", "seed", 3);
  expect_error("kind = corridor\nseed = 1\na = 20\n", "a", 3);
  expect_error("kind = corridor\nseed = 1\nrounds = 10\nwarmup = 10\n", "warmup", 4);
  expect_error("kind = corridor\nseed = 1\ndensity = 1.5\n", "density", 3);
  expect_error("kind = map\nseed = 1\n", "map_path", 0);
}

TEST(ParseConfig, RejectsLineWithoutEquals) {
  EXPECT_THROW(parse_config("kind = corridor\nseed 1\n"), ConfigError);
}

TEST(ParseConfig, SerializeRoundTrip) {
  ScenarioConfig c;
  c.kind = ScenarioKind::OpenArea;
  c.seed = 18446744073709551615ull;
  c.width = 33;
  c.height = 17;
  c.density = 0.1 + 0.2;
  c.split = 0.3;
  c.v_max = 2;
  c.k_s = 3.7;
  c.counterflow.k_f = 0.45;
  c.counterflow.n_max = 4;
  c.counterflow.r_max = 7.25;
  c.counterflow.h = 3;
  c.counterflow.delta = 0.01;
  c.counterflow.a = 1.5;
  c.counterflow.b = 9;
  c.counterflow.fov_half_angle = 1.2345678901234567;
  c.counterflow.region_variant = RegionVariant::Pyramid;
  c.rounds = 321;
  c.warmup = 20;
  c.deadlock_window = 7;
  c.deadlock_eps = 0.125;
  const ScenarioConfig back = parse_config(serialize_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), serialize_config(c));

  ScenarioConfig m;
  m.kind = ScenarioKind::MapFile;
  m.map_path = "maps/bottleneck.txt";
  EXPECT_EQ(parse_config(serialize_config(m)), m);
}

ScenarioConfig corridor_config(double density, std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.density = density;
  c.seed = seed;
  return c;
}

TEST(BuildCorridor, Geometry) {
  const SimState s = build_corridor(corridor_config(0.2));
  const Grid& g = s.grid();
  EXPECT_EQ(g.width(), 60);
  EXPECT_EQ(g.height(), 10);
  EXPECT_TRUE(g.periodic_x());
  for (int x = 0; x < 60; ++x) {
    EXPECT_TRUE(g.is_wall({x, 0}));
    EXPECT_TRUE(g.is_wall({x, 9}));
    for (int y = 1; y < 9; ++y) EXPECT_TRUE(g.is_floor({x, y}));
  }
  EXPECT_EQ(s.lattice->floor_count(), 480u);
}

TEST(BuildCorridor, AgentCountsAndSplit) {
  const SimState s = build_corridor(corridor_config(0.2));
  ASSERT_EQ(s.agents.size(), 96u);
  int right = 0;
  for (const Agent& a : s.agents) right += a.species == Species::Rightward;
  EXPECT_EQ(right, 48);
  EXPECT_TRUE(build_corridor(corridor_config(0.0)).agents.empty());
  EXPECT_EQ(build_corridor(corridor_config(1.0)).agents.size(), 480u);
}

TEST(BuildCorridor, PlacementFuzz) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ScenarioConfig c = corridor_config(0.05 + 0.018 * static_cast<double>(seed), seed);
    c.split = 0.02 * static_cast<double>(seed);
    const SimState s = build_corridor(c);
    std::set<Cell> seen;
    for (const Agent& a : s.agents) {
      EXPECT_TRUE(s.grid().is_floor(a.pos));
      EXPECT_TRUE(seen.insert(a.pos).second);
      EXPECT_TRUE(a.vel.is_zero());
      EXPECT_EQ(a.v_max, 3);
    }
    EXPECT_EQ(s.agents.size(), static_cast<std::size_t>(std::floor(c.density * 480 + 1e-9)));
  }
}

TEST(BuildCorridor, SeedChangesPlacement) {
  const SimState a = build_corridor(corridor_config(0.2, 1));
  const SimState b = build_corridor(corridor_config(0.2, 2));
  int same = 0;
  for (std::size_t k = 0; k < a.agents.size(); ++k) same += a.agents[k].pos == b.agents[k].pos;
  EXPECT_LT(same, 10);
}

ScenarioConfig open_config(double density, double split = 0.5) {
  ScenarioConfig c;
  c.kind = ScenarioKind::OpenArea;
  c.width = 20;
  c.height = 20;
  c.density = density;
  c.split = split;
  return c;
}

TEST(BuildOpenArea, CountsAndGoals) {
  const SimState s = build_open_area(open_config(0.1));
  EXPECT_EQ(s.agents.size(), 40u);
  EXPECT_FALSE(s.grid().periodic_x());
  EXPECT_TRUE(s.respawn.enabled);
  for (int y = 0; y < 20; ++y) {
    EXPECT_TRUE(s.lattice->is_goal(Species::Rightward, {19, y}));
    EXPECT_TRUE(s.lattice->is_goal(Species::Leftward, {0, y}));
  }
  EXPECT_EQ(s.lattice->field(Species::Rightward).value(s.grid(), {0, 5}), 19.0);
}

TEST(BuildOpenArea, SingleSpeciesWhenSplitIsOne) {
  const SimState s = build_open_area(open_config(0.1, 1.0));
  for (const Agent& a : s.agents) EXPECT_EQ(a.species, Species::Rightward);
}

TEST(BuildOpenArea, ArrivalsReenterOnTheirOriginEdge) {
  ScenarioConfig c = open_config(0.0);
  c.width = 6;
  c.height = 3;
  SimState s = build_open_area(c);
  Agent a;
  a.pos = {4, 1};
  s.agents.push_back(a);
  s.params.k_s = 60;
  s.sync();
  advance(s);
  ASSERT_EQ(s.agents.size(), 1u);
  EXPECT_EQ(s.agents[0].pos.x, 0);
}

TEST(BuildOpenArea, RespawnDeferredWhileEntryIsFull) {
  ScenarioConfig c = open_config(0.0);
  c.width = 6;
  c.height = 1;
  SimState s = build_open_area(c);
  Agent blocker;
  blocker.id = 1;
  blocker.pos = {0, 0};
  blocker.species = Species::Rightward;  // not on its goal
  Agent arriving;
  arriving.pos = {5, 0};
  s.agents = {arriving, blocker};
  s.sync();
  detail::apply_respawn(s);
  EXPECT_EQ(s.agents[0].pos, (Cell{5, 0}));
  s.agents[1].pos = {2, 0};
  s.sync();
  detail::apply_respawn(s);
  EXPECT_EQ(s.agents[0].pos, (Cell{0, 0}));
}

TEST(ParseMap, CharactersAndErrors) {
  const ParsedMap pm = parse_map(read_map_text("#####\n#>.<E\nW...#\n#####\n"));
  EXPECT_EQ(pm.grid.width(), 5);
  EXPECT_EQ(pm.grid.height(), 4);
  EXPECT_TRUE(pm.grid.is_wall({0, 0}));
  EXPECT_TRUE(pm.grid.is_floor({1, 1}));
  ASSERT_EQ(pm.agents.size(), 2u);
  EXPECT_EQ(pm.agents[0].second, Species::Rightward);
  EXPECT_EQ(pm.agents[1].first, (Cell{3, 1}));
  EXPECT_EQ(pm.east_goals, (std::vector<Cell>{{4, 1}}));
  EXPECT_EQ(pm.west_goals, (std::vector<Cell>{{0, 2}}));

  EXPECT_THROW(parse_map(read_map_text("###\n##\n")), ConfigError);
  EXPECT_THROW(parse_map(read_map_text("#x#\n")), ConfigError);
  EXPECT_THROW(parse_map(read_map_text("")), ConfigError);
  try {
    parse_map(read_map_text("...\n...\n.?.\n"));
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(BuildFromMap, UsesMapAgentsAndGoals) {
  ScenarioConfig c;
  c.kind = ScenarioKind::MapFile;
  c.map_path = "inline";
  const SimState s = build_from_map(c, read_map_text("#######\nW>..<.E\n#######\n"));
  ASSERT_EQ(s.agents.size(), 2u);
  EXPECT_TRUE(s.lattice->is_goal(Species::Rightward, {6, 1}));
  EXPECT_TRUE(s.lattice->is_goal(Species::Leftward, {0, 1}));
  EXPECT_EQ(s.lattice->field(Species::Rightward).value(s.grid(), {1, 1}), 5.0);
}

TEST(BuildFromMap, EdgeGoalsAndDensitySeedingByDefault) {
  ScenarioConfig c;
  c.kind = ScenarioKind::MapFile;
  c.map_path = "inline";
  c.density = 0.5;
  const SimState s = build_from_map(c, read_map_text("#....#\n......\n#....#\n"));
  EXPECT_EQ(s.agents.size(), 7u);
  EXPECT_TRUE(s.lattice->is_goal(Species::Rightward, {5, 1}));
  EXPECT_FALSE(s.lattice->is_goal(Species::Rightward, {5, 0}));
}

TEST(BuildFromMap, RejectsUnreachableGoals) {
  ScenarioConfig c;
  c.kind = ScenarioKind::MapFile;
  c.map_path = "inline";
  EXPECT_THROW(build_from_map(c, read_map_text("#..#\n#..#\n")), ConfigError);
}

}  // namespace
}  // namespace fastflow
