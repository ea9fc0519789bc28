#include "wbc/pathref.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "wbc/errors.hpp"

namespace wbc {

namespace {

constexpr double kCell = 0.05;

double point_obstacle_distance(const WorldModel& world, const Vec2& p) {
  double best = kInfDist;
  for (const Obstacle& ob : world.obstacles) {
    double d;
    if (const auto* box = std::get_if<Aabb>(&ob)) {
      d = box->contains(p) ? 0.0 : point_aabb_distance(p, *box);
    } else {
      d = point_segment_distance(p, std::get<Segment>(ob));
    }
    best = std::min(best, d);
    if (best == 0.0) break;
  }
  return best;
}

struct Grid {
  int nx = 0, ny = 0;
  Vec2 origin;  // center of cell (0, 0)
  std::vector<uint8_t> occupied;

  int idx(int ix, int iy) const { return iy * nx + ix; }
  Vec2 center(int ix, int iy) const { return {origin.x + ix * kCell, origin.y + iy * kCell}; }
  bool valid(int ix, int iy) const { return ix >= 0 && ix < nx && iy >= 0 && iy < ny; }
};

Grid build_grid(const WorldModel& world, double inflation) {
  Grid g;
  g.origin = {world.bounds.lo.x + kCell * 0.5, world.bounds.lo.y + kCell * 0.5};
  g.nx = std::max(1, static_cast<int>(std::ceil((world.bounds.hi.x - world.bounds.lo.x) / kCell)));
  g.ny = std::max(1, static_cast<int>(std::ceil((world.bounds.hi.y - world.bounds.lo.y) / kCell)));
  g.occupied.assign(static_cast<size_t>(g.nx) * g.ny, 0);
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (point_obstacle_distance(world, g.center(ix, iy)) <= inflation) g.occupied[g.idx(ix, iy)] = 1;
    }
  }
  return g;
}

// Line of sight at the inflated clearance, sampled every 0.01 m.
bool segment_clear(const WorldModel& world, const Vec2& a, const Vec2& b, double inflation) {
  double len = norm(b - a);
  int n = std::max(1, static_cast<int>(std::ceil(len / 0.01)));
  for (int i = 0; i <= n; ++i) {
    Vec2 p = a + (b - a) * (static_cast<double>(i) / n);
    if (point_obstacle_distance(world, p) <= inflation) return false;
  }
  return true;
}

struct CellRef {
  double f;
  double g;
  int id;
  bool operator>(const CellRef& o) const {
    return std::tie(f, g, id) > std::tie(o.f, o.g, o.id);
  }
};

bool find_free_cell_near(const Grid& grid, const Vec2& p, int* out_ix, int* out_iy) {
  int cx = static_cast<int>(std::lround((p.x - grid.origin.x) / kCell));
  int cy = static_cast<int>(std::lround((p.y - grid.origin.y) / kCell));
  for (int r = 0; r <= 4; ++r) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        int ix = cx + dx, iy = cy + dy;
        if (grid.valid(ix, iy) && !grid.occupied[grid.idx(ix, iy)]) {
          *out_ix = ix;
          *out_iy = iy;
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

RefPath plan_ee_path(const WorldModel& world, const Vec2& start, const Vec2& goal, double inflation) {
  Grid grid = build_grid(world, inflation);
  int sx, sy, gx, gy;
  if (!find_free_cell_near(grid, start, &sx, &sy)) throw NoPathError("pathref: start blocked");
  if (!find_free_cell_near(grid, goal, &gx, &gy)) throw NoPathError("pathref: goal blocked");

  const size_t n_cells = grid.occupied.size();
  std::vector<double> g_cost(n_cells, kInfDist);
  std::vector<int> parent(n_cells, -1);
  std::priority_queue<CellRef, std::vector<CellRef>, std::greater<CellRef>> open;

  auto heuristic = [&](int ix, int iy) {
    double dx = std::abs(ix - gx), dy = std::abs(iy - gy);
    return kCell * (std::max(dx, dy) + (M_SQRT2 - 1.0) * std::min(dx, dy));
  };

  int start_id = grid.idx(sx, sy);
  g_cost[start_id] = 0.0;
  open.push({heuristic(sx, sy), 0.0, start_id});
  const int goal_id = grid.idx(gx, gy);
  static const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  bool found = false;
  while (!open.empty()) {
    CellRef cur = open.top();
    open.pop();
    if (cur.g > g_cost[cur.id]) continue;
    if (cur.id == goal_id) {
      found = true;
      break;
    }
    int cx = cur.id % grid.nx, cy = cur.id / grid.nx;
    for (int k = 0; k < 8; ++k) {
      int nx = cx + dxs[k], ny = cy + dys[k];
      if (!grid.valid(nx, ny)) continue;
      int nid = grid.idx(nx, ny);
      if (grid.occupied[nid]) continue;
      // Forbid diagonal corner cutting.
      if (k >= 4 && (grid.occupied[grid.idx(cx, ny)] || grid.occupied[grid.idx(nx, cy)])) continue;
      double step = (k < 4) ? kCell : kCell * M_SQRT2;
      double ng = cur.g + step;
      if (ng < g_cost[nid]) {
        g_cost[nid] = ng;
        parent[nid] = cur.id;
        open.push({ng + heuristic(nx, ny), ng, nid});
      }
    }
  }
  if (!found) throw NoPathError("pathref: grid search exhausted");

  std::vector<Vec2> cells;
  for (int id = goal_id; id != -1; id = parent[id]) {
    cells.push_back(grid.center(id % grid.nx, id / grid.nx));
  }
  std::reverse(cells.begin(), cells.end());

  // Anchor the polyline at the exact start/goal when directly connectable.
  std::vector<Vec2> raw;
  raw.push_back(start);
  for (const Vec2& c : cells) raw.push_back(c);
  raw.push_back(goal);

  // Greedy shortcutting: from each anchor, jump to the farthest visible point.
  std::vector<Vec2> pts;
  pts.push_back(raw.front());
  size_t i = 0;
  while (i + 1 < raw.size()) {
    size_t best = i + 1;
    for (size_t j = raw.size() - 1; j > i; --j) {
      if (segment_clear(world, raw[i], raw[j], inflation)) {
        best = j;
        break;
      }
    }
    pts.push_back(raw[best]);
    i = best;
  }

  RefPath path;
  path.waypoints.push_back(pts.front());
  path.cum_length.push_back(0.0);
  double s = 0.0;
  for (size_t k = 1; k < pts.size(); ++k) {
    double len = norm(pts[k] - pts[k - 1]);
    if (len <= 1e-12) continue;  // cum_length must stay strictly increasing
    s += len;
    path.waypoints.push_back(pts[k]);
    path.cum_length.push_back(s);
  }
  path.total_length = s;
  if (path.waypoints.size() < 2 || path.total_length <= 0.0) {
    // Degenerate start == goal: keep a minimal two-point path.
    path.waypoints = {start, goal + Vec2{1e-6, 0.0}};
    path.cum_length = {0.0, norm(path.waypoints[1] - path.waypoints[0])};
    path.total_length = path.cum_length[1];
  }
  return path;
}

PathProjection project(const RefPath& path, const Vec2& pt) {
  constexpr double kTie = 1e-12;
  PathProjection best{0.0, kInfDist};
  for (size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
    Vec2 a = path.waypoints[i];
    Vec2 ab = path.waypoints[i + 1] - a;
    double len_sq = norm_sq(ab);
    double t = len_sq > 0.0 ? std::clamp(dot(pt - a, ab) / len_sq, 0.0, 1.0) : 0.0;
    double d = norm(pt - (a + ab * t));
    double s = path.cum_length[i] + t * std::sqrt(len_sq);
    if (d < best.deviation - kTie || (d <= best.deviation + kTie && s > best.s)) {
      best = {s, d};
    }
  }
  return best;
}

}  // namespace wbc
