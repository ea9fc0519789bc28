#include "wbc/world.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wbc/errors.hpp"
#include "wbc/rng.hpp"

namespace wbc {
namespace {

WorldModel two_walls() {
  WorldModel w;
  w.obstacles = {Segment{{0, 1}, {10, 1}}, Segment{{0, -1}, {10, -1}}};
  w.corridor_width = 2.0;
  w.corridor_length = 10.0;
  w.goal_region = {{5, 0.5}, {0.3, 0.2}, 0.0};
  w.spawn_region = {{2, 0}, {0.5, 0.3}};
  w.bounds = {{-1, -2}, {11, 2}};
  return w;
}

TEST(World, FixedLayoutPassthrough) {
  ScenarioSpec spec;
  spec.fixed_layout = two_walls();
  WorldModel w = generate_world(spec, 12345);
  ASSERT_EQ(w.obstacles.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<Segment>(w.obstacles[0]));
  EXPECT_EQ(std::get<Segment>(w.obstacles[0]).b.x, 10.0);
  WorldModel w2 = generate_world(spec, 999);
  EXPECT_EQ(world_to_json(w), world_to_json(w2));
}

TEST(World, GenerateDeterministic) {
  ScenarioSpec spec;
  WorldModel a = generate_world(spec, 42);
  WorldModel b = generate_world(spec, 42);
  EXPECT_EQ(world_to_json(a), world_to_json(b));
  WorldModel c = generate_world(spec, 43);
  EXPECT_NE(world_to_json(a), world_to_json(c));
}

TEST(World, GeneratedWidthsWithinSpecRange) {
  ScenarioSpec spec;
  spec.corridor_width_range = {1.5, 3.0};
  for (uint64_t seed = 0; seed < 200; ++seed) {
    WorldModel w = generate_world(spec, seed);
    EXPECT_GE(w.corridor_width, 1.5);
    EXPECT_LE(w.corridor_width, 3.0);
    EXPECT_GE(w.corridor_length, spec.corridor_length_range[0]);
    EXPECT_LE(w.corridor_length, spec.corridor_length_range[1]);
    EXPECT_TRUE(w.bounds.contains(w.goal_region.center));
    EXPECT_TRUE(w.bounds.contains(w.spawn_region.center));
  }
}

TEST(World, RaycastEmptyWorldReturnsMaxRange) {
  WorldModel w;
  w.bounds = {{-10, -10}, {10, 10}};
  EXPECT_DOUBLE_EQ(raycast(w, {0, 0}, {1, 0}, 5.0), 5.0);
}

TEST(World, RaycastWallExamples) {
  WorldModel w;
  w.obstacles = {Segment{{2, -5}, {2, 5}}};
  EXPECT_DOUBLE_EQ(raycast(w, {0, 0}, {1, 0}, 5.0), 2.0);
  EXPECT_DOUBLE_EQ(raycast(w, {0, 0}, {0, 1}, 5.0), 5.0);
}

TEST(World, MinClearanceCorridorCenter) {
  WorldModel w = two_walls();
  std::vector<Shape> point{Capsule{{5, 0}, {5, 0}, 0.0}};
  EXPECT_DOUBLE_EQ(min_clearance(w, point), 1.0);
}

TEST(World, OverlapClampsToZeroAndCollisionAgrees) {
  WorldModel w = two_walls();
  std::vector<Shape> box{ConvexPolygon{{{4, 0.5}, {6, 0.5}, {6, 1.5}, {4, 1.5}}}};
  EXPECT_DOUBLE_EQ(min_clearance(w, box), 0.0);
  EXPECT_TRUE(in_collision(w, box));
}

TEST(World, TangentWithinEpsilonCountsAsCollision) {
  WorldModel w = two_walls();
  std::vector<Shape> box{
      ConvexPolygon{{{4, 0.5}, {6, 0.5}, {6, 1.0 - 1e-10}, {4, 1.0 - 1e-10}}}};
  EXPECT_DOUBLE_EQ(min_clearance(w, box), 0.0);
  EXPECT_TRUE(in_collision(w, box));
}

TEST(World, EmptyObstacleListInfiniteClearance) {
  WorldModel w;
  std::vector<Shape> point{Capsule{{0, 0}, {0, 0}, 0.0}};
  EXPECT_EQ(min_clearance(w, point), kInfDist);
  EXPECT_FALSE(in_collision(w, point));
}

TEST(World, CollisionIffZeroClearanceOnRandomInputs) {
  Rng rng(3);
  ScenarioSpec spec;
  for (int i = 0; i < 20; ++i) {
    WorldModel w = generate_world(spec, 100 + i);
    for (int k = 0; k < 100; ++k) {
      Vec2 c{rng.uniform(w.bounds.lo.x, w.bounds.hi.x), rng.uniform(w.bounds.lo.y, w.bounds.hi.y)};
      std::vector<Shape> shape{
          oriented_box_polygon(c, {rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5)},
                               rng.uniform(-3.2, 3.2))};
      EXPECT_EQ(in_collision(w, shape), min_clearance(w, shape) == 0.0);
    }
  }
}

TEST(World, RaycastMatchesOracleOnRandomWorlds) {
  Rng rng(5);
  ScenarioSpec spec;
  for (int i = 0; i < 10; ++i) {
    WorldModel w = generate_world(spec, 200 + i);
    for (int k = 0; k < 1000; ++k) {
      Vec2 o{rng.uniform(w.bounds.lo.x, w.bounds.hi.x), rng.uniform(w.bounds.lo.y, w.bounds.hi.y)};
      Vec2 d = unit(rng.uniform(0, 2 * M_PI));
      EXPECT_NEAR(raycast(w, o, d, 5.0), oracle::raycast(w, o, d, 5.0), 1e-9);
    }
  }
}

TEST(World, JsonRoundTrip) {
  WorldModel w = generate_world(ScenarioSpec{}, 7);
  WorldModel back = world_from_json(world_to_json(w));
  EXPECT_EQ(world_to_json(back), world_to_json(w));
}

TEST(World, JsonRejectsBadInput) {
  EXPECT_THROW(world_from_json("{"), ConfigError);
  EXPECT_THROW(world_from_json("{\"obstacles\":[]}"), ConfigError);
}

TEST(World, InvalidSpecRangesThrow) {
  ScenarioSpec spec;
  spec.corridor_width_range = {3.0, 1.5};
  EXPECT_THROW(generate_world(spec, 0), ConfigError);
  ScenarioSpec spec2;
  spec2.shelf_count_range = {-1, 2};
  EXPECT_THROW(generate_world(spec2, 0), ConfigError);
}

TEST(World, ImpossibleSpecFailsAfterAttempts) {
  ScenarioSpec spec;
  spec.corridor_length_range = {3.0, 3.0};  // too short to place shelf + spawn
  EXPECT_THROW(generate_world(spec, 0), GenerationFailed);
}

}  // namespace
}  // namespace wbc
