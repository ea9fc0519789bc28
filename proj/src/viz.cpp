#include "wbc/viz.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wbc/errors.hpp"
#include "wbc/robot.hpp"

namespace wbc {

Canvas::Canvas(int width, int height, Rgb bg) : width_(width), height_(height) {
  rgb_.resize(static_cast<size_t>(width) * height * 3);
  for (int i = 0; i < width * height; ++i) {
    rgb_[3 * i] = bg.r;
    rgb_[3 * i + 1] = bg.g;
    rgb_[3 * i + 2] = bg.b;
  }
}

void Canvas::set(int x, int y, Rgb c) {
  if (x < 0 || x >= width_ || y < 0 || y >= height_) return;
  size_t i = (static_cast<size_t>(y) * width_ + x) * 3;
  rgb_[i] = c.r;
  rgb_[i + 1] = c.g;
  rgb_[i + 2] = c.b;
}

void Canvas::line(int x0, int y0, int x1, int y1, Rgb c) {
  int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Canvas::fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) set(x, y, c);
}

void Canvas::circle(int cx, int cy, int radius, Rgb c) {
  int n = std::max(16, 6 * radius);
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * M_PI * i / n;
    set(cx + static_cast<int>(std::lround(radius * std::cos(a))),
        cy + static_cast<int>(std::lround(radius * std::sin(a))), c);
  }
}

void Canvas::disc(int cx, int cy, int radius, Rgb c) {
  for (int y = -radius; y <= radius; ++y)
    for (int x = -radius; x <= radius; ++x)
      if (x * x + y * y <= radius * radius) set(cx + x, cy + y, c);
}

void write_ppm(const Canvas& canvas, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("viz: cannot open '" + path + "' for writing");
  out << "P6\n" << canvas.width() << " " << canvas.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(canvas.pixels().data()),
            static_cast<std::streamsize>(canvas.pixels().size()));
}

namespace {

struct Mapper {
  double scale;
  Vec2 lo;
  int height;

  int x(double wx) const { return static_cast<int>(std::lround((wx - lo.x) * scale)); }
  int y(double wy) const { return height - 1 - static_cast<int>(std::lround((wy - lo.y) * scale)); }
  int len(double m) const { return std::max(1, static_cast<int>(std::lround(m * scale))); }
};

void draw_world(Canvas& canvas, const Mapper& m, const WorldModel& world) {
  const Rgb wall{60, 60, 60};
  for (const Obstacle& ob : world.obstacles) {
    if (const auto* box = std::get_if<Aabb>(&ob)) {
      canvas.fill_rect(m.x(box->lo.x), m.y(box->hi.y), m.x(box->hi.x), m.y(box->lo.y), wall);
    } else {
      const auto& seg = std::get<Segment>(ob);
      canvas.line(m.x(seg.a.x), m.y(seg.a.y), m.x(seg.b.x), m.y(seg.b.y), wall);
    }
  }
  const OrientedBox& g = world.goal_region;
  ConvexPolygon gp = oriented_box_polygon(g.center, g.half, g.yaw);
  for (size_t i = 0; i < 4; ++i) {
    const Vec2& a = gp.pts[i];
    const Vec2& b = gp.pts[(i + 1) % 4];
    canvas.line(m.x(a.x), m.y(a.y), m.x(b.x), m.y(b.y), Rgb{200, 40, 40});
  }
  const Ellipse& e = world.spawn_region;
  for (int i = 0; i < 128; ++i) {
    double a = 2.0 * M_PI * i / 128;
    canvas.set(m.x(e.center.x + e.radii.x * std::cos(a)), m.y(e.center.y + e.radii.y * std::sin(a)),
               Rgb{60, 90, 220});
  }
}

void draw_robot(Canvas& canvas, const Mapper& m, const RobotState& s, const RobotParams& p) {
  ConvexPolygon base = oriented_box_polygon({s.x, s.y}, p.base_half_extents, s.theta);
  for (size_t i = 0; i < 4; ++i) {
    const Vec2& a = base.pts[i];
    const Vec2& b = base.pts[(i + 1) % 4];
    canvas.line(m.x(a.x), m.y(a.y), m.x(b.x), m.y(b.y), Rgb{10, 10, 10});
  }
  Vec2 mount = Vec2{s.x, s.y} + rotate(p.arm_mount_offset, s.theta);
  Vec2 elbow = mount + unit(s.theta + s.phi[0]) * p.link_length_1;
  Vec2 ee = elbow + unit(s.theta + s.phi[0] + s.phi[1]) * p.link_length_2;
  canvas.line(m.x(mount.x), m.y(mount.y), m.x(elbow.x), m.y(elbow.y), Rgb{160, 80, 20});
  canvas.line(m.x(elbow.x), m.y(elbow.y), m.x(ee.x), m.y(ee.y), Rgb{160, 80, 20});
  canvas.disc(m.x(ee.x), m.y(ee.y), 3, Rgb{160, 80, 20});
}

void draw_scan(Canvas& canvas, const Mapper& m, const RobotState& s, const LidarConfig& cfg,
               const std::vector<float>& ranges, Rgb color) {
  Vec2 origin = Vec2{s.x, s.y} + rotate(cfg.mount_pos, s.theta);
  for (size_t i = 0; i < ranges.size(); ++i) {
    double bearing =
        cfg.mount_yaw + s.theta + cfg.fov * (static_cast<double>(i) / (cfg.n_beams - 1) - 0.5);
    Vec2 hit = origin + unit(bearing) * static_cast<double>(ranges[i]);
    canvas.set(m.x(hit.x), m.y(hit.y), color);
  }
}

}  // namespace

Canvas render_frame(const WorldModel& world, const RobotState& state, const RobotParams& robot,
                    const std::vector<Vec2>& ref_path, const Vec2& goal, double d_h,
                    const std::vector<float>& scan_front, const std::vector<float>& scan_rear,
                    const LidarConfig& lidar_front, const LidarConfig& lidar_rear) {
  const double margin = 0.3;
  Vec2 lo = world.bounds.lo - Vec2{margin, margin};
  Vec2 hi = world.bounds.hi + Vec2{margin, margin};
  double scale = std::min(80.0, 1200.0 / std::max(hi.x - lo.x, 1e-6));
  int width = std::max(64, static_cast<int>((hi.x - lo.x) * scale));
  int height = std::max(64, static_cast<int>((hi.y - lo.y) * scale));
  Canvas canvas(width, height, Rgb{245, 245, 245});
  Mapper m{scale, lo, height};

  draw_world(canvas, m, world);
  for (size_t i = 1; i < ref_path.size(); ++i) {
    canvas.line(m.x(ref_path[i - 1].x), m.y(ref_path[i - 1].y), m.x(ref_path[i].x),
                m.y(ref_path[i].y), Rgb{40, 160, 60});
  }
  canvas.circle(m.x(goal.x), m.y(goal.y), m.len(d_h), Rgb{220, 60, 60});
  canvas.disc(m.x(goal.x), m.y(goal.y), 2, Rgb{220, 60, 60});
  if (!scan_front.empty()) draw_scan(canvas, m, state, lidar_front, scan_front, Rgb{230, 180, 40});
  if (!scan_rear.empty()) draw_scan(canvas, m, state, lidar_rear, scan_rear, Rgb{230, 140, 40});
  draw_robot(canvas, m, state, robot);
  return canvas;
}

int render_trace_frames(const EpisodeTrace& trace, const RobotParams& robot,
                        const LidarConfig& lidar_front, const LidarConfig& lidar_rear,
                        const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  WorldModel world = world_from_json(trace.world_json);
  int frame = 0;
  for (const TraceStep& s : trace.steps) {
    Canvas canvas = render_frame(world, s.state, robot, trace.ref_path, trace.goal, trace.d_h,
                                 s.scan_front, s.scan_rear, lidar_front, lidar_rear);
    char name[64];
    std::snprintf(name, sizeof(name), "/frame_%05d.ppm", frame);
    write_ppm(canvas, out_dir + name);
    ++frame;
  }
  return frame;
}

void plot_series(const std::vector<double>& x, const std::vector<std::vector<double>>& series,
                 const std::vector<Rgb>& colors, const std::string& path) {
  const int w = 900, h = 300, pad = 40;
  Canvas canvas(w, h, Rgb{255, 255, 255});
  double x_lo = x.empty() ? 0.0 : x.front();
  double x_hi = x.empty() ? 1.0 : x.back();
  double y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series)
    for (double v : s) {
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  if (y_lo > y_hi) {
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (y_hi - y_lo < 1e-12) y_hi = y_lo + 1.0;
  if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;

  auto px = [&](double v) {
    return pad + static_cast<int>((v - x_lo) / (x_hi - x_lo) * (w - 2 * pad));
  };
  auto py = [&](double v) {
    return h - pad - static_cast<int>((v - y_lo) / (y_hi - y_lo) * (h - 2 * pad));
  };
  canvas.line(pad, h - pad, w - pad, h - pad, Rgb{0, 0, 0});
  canvas.line(pad, pad, pad, h - pad, Rgb{0, 0, 0});
  if (y_lo < 0.0 && y_hi > 0.0)
    canvas.line(pad, py(0.0), w - pad, py(0.0), Rgb{210, 210, 210});
  for (size_t k = 0; k < series.size(); ++k) {
    Rgb c = colors[k % colors.size()];
    const auto& s = series[k];
    for (size_t i = 1; i < s.size() && i < x.size(); ++i) {
      canvas.line(px(x[i - 1]), py(s[i - 1]), px(x[i]), py(s[i]), c);
    }
  }
  write_ppm(canvas, path);
}

void render_training_plots(const std::string& csv_path, const std::string& out_dir) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("viz: cannot open training log '" + csv_path + "'");
  std::filesystem::create_directories(out_dir);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> steps, reward, smoothed, success, smoothed_success, d_h;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::vector<double> cols;
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(std::atof(cell.c_str()));
    if (cols.size() < 8) continue;
    steps.push_back(cols[1]);
    reward.push_back(cols[3]);
    smoothed.push_back(cols[4]);
    success.push_back(cols[5]);
    smoothed_success.push_back(cols[6]);
    d_h.push_back(cols[7]);
  }
  plot_series(steps, {reward, smoothed}, {Rgb{170, 200, 255}, Rgb{20, 60, 220}},
              out_dir + "/reward.ppm");
  plot_series(steps, {success, smoothed_success}, {Rgb{255, 190, 160}, Rgb{220, 80, 20}},
              out_dir + "/success_rate.ppm");
  plot_series(steps, {d_h}, {Rgb{30, 140, 40}}, out_dir + "/tolerance.ppm");
}

}  // namespace wbc
