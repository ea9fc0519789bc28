#include "wbc/world.hpp"

#include <algorithm>

#include <json.hpp>

#include "wbc/errors.hpp"

namespace wbc {

namespace {
constexpr double kContactEps = 1e-9;
}

void ScenarioSpec::validate() const {
  auto check = [](double lo, double hi, const char* name) {
    if (!(lo <= hi) || lo < 0.0) throw ConfigError(std::string("scenario: bad range for ") + name);
  };
  check(corridor_width_range[0], corridor_width_range[1], "corridor_width");
  check(corridor_length_range[0], corridor_length_range[1], "corridor_length");
  check(shelf_depth_range[0], shelf_depth_range[1], "shelf_depth");
  check(shelf_width_range[0], shelf_width_range[1], "shelf_width");
  check(door_width_range[0], door_width_range[1], "door_width");
  check(spawn_distance_range[0], spawn_distance_range[1], "spawn_distance");
  auto check_int = [](int lo, int hi, const char* name) {
    if (lo > hi || lo < 0) throw ConfigError(std::string("scenario: bad range for ") + name);
  };
  check_int(shelf_count_range[0], shelf_count_range[1], "shelf_count");
  check_int(door_count_range[0], door_count_range[1], "door_count");
  if (!seedable && !fixed_layout) throw ConfigError("scenario: seedable=false requires fixed_layout");
}

double raycast(const WorldModel& world, const Vec2& origin, const Vec2& dir, double max_range) {
  double best = max_range;
  for (const Obstacle& ob : world.obstacles) {
    double t;
    if (const auto* box = std::get_if<Aabb>(&ob)) {
      t = ray_aabb_intersect(origin, dir, *box);
    } else {
      t = ray_segment_intersect(origin, dir, std::get<Segment>(ob));
    }
    best = std::min(best, t);
  }
  return best;
}

double min_clearance(const WorldModel& world, std::span<const Shape> shapes) {
  double best = kInfDist;
  for (const Shape& shape : shapes) {
    for (const Obstacle& ob : world.obstacles) {
      double d;
      if (const auto* box = std::get_if<Aabb>(&ob)) {
        d = shape_aabb_distance(shape, *box);
      } else {
        d = shape_segment_distance(shape, std::get<Segment>(ob));
      }
      if (d <= kContactEps) return 0.0;
      best = std::min(best, d);
    }
  }
  return best;
}

bool in_collision(const WorldModel& world, std::span<const Shape> shapes) {
  return min_clearance(world, shapes) == 0.0;
}

namespace {

using nlohmann::json;

json vec2_to_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("world json: expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string world_to_json(const WorldModel& world) {
  json j;
  j["bounds"] = {{"lo", vec2_to_json(world.bounds.lo)}, {"hi", vec2_to_json(world.bounds.hi)}};
  j["corridor"] = {{"origin", vec2_to_json(world.corridor_origin)},
                   {"dir", vec2_to_json(world.corridor_dir)},
                   {"width", world.corridor_width},
                   {"length", world.corridor_length}};
  j["goal_region"] = {{"center", vec2_to_json(world.goal_region.center)},
                      {"half", vec2_to_json(world.goal_region.half)},
                      {"yaw", world.goal_region.yaw}};
  j["spawn_region"] = {{"center", vec2_to_json(world.spawn_region.center)},
                       {"radii", vec2_to_json(world.spawn_region.radii)}};
  json obs = json::array();
  for (const Obstacle& ob : world.obstacles) {
    if (const auto* box = std::get_if<Aabb>(&ob)) {
      obs.push_back({{"type", "box"}, {"lo", vec2_to_json(box->lo)}, {"hi", vec2_to_json(box->hi)}});
    } else {
      const auto& seg = std::get<Segment>(ob);
      obs.push_back({{"type", "segment"}, {"a", vec2_to_json(seg.a)}, {"b", vec2_to_json(seg.b)}});
    }
  }
  j["obstacles"] = std::move(obs);
  return j.dump();
}

WorldModel world_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("world json: ") + e.what());
  }
  WorldModel w;
  try {
    w.bounds.lo = vec2_from_json(j.at("bounds").at("lo"));
    w.bounds.hi = vec2_from_json(j.at("bounds").at("hi"));
    const json& cor = j.at("corridor");
    w.corridor_origin = vec2_from_json(cor.at("origin"));
    w.corridor_dir = vec2_from_json(cor.at("dir"));
    w.corridor_width = cor.at("width").get<double>();
    w.corridor_length = cor.at("length").get<double>();
    const json& goal = j.at("goal_region");
    w.goal_region.center = vec2_from_json(goal.at("center"));
    w.goal_region.half = vec2_from_json(goal.at("half"));
    w.goal_region.yaw = goal.at("yaw").get<double>();
    const json& spawn = j.at("spawn_region");
    w.spawn_region.center = vec2_from_json(spawn.at("center"));
    w.spawn_region.radii = vec2_from_json(spawn.at("radii"));
    for (const json& ob : j.at("obstacles")) {
      const std::string type = ob.at("type").get<std::string>();
      if (type == "box") {
        w.obstacles.push_back(Aabb{vec2_from_json(ob.at("lo")), vec2_from_json(ob.at("hi"))});
      } else if (type == "segment") {
        w.obstacles.push_back(Segment{vec2_from_json(ob.at("a")), vec2_from_json(ob.at("b"))});
      } else {
        throw ConfigError("world json: unknown obstacle type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("world json: ") + e.what());
  }
  auto inside = [&w](const Vec2& p) { return w.bounds.contains(p); };
  if (!inside(w.goal_region.center) || !inside(w.spawn_region.center)) {
    throw ConfigError("world json: goal/spawn region outside bounds");
  }
  return w;
}

}  // namespace wbc
