#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wbc/env.hpp"
#include "wbc/sensors.hpp"

namespace wbc {

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
};

class Canvas {
 public:
  Canvas(int width, int height, Rgb background);

  int width() const { return width_; }
  int height() const { return height_; }
  void set(int x, int y, Rgb c);
  void line(int x0, int y0, int x1, int y1, Rgb c);
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);
  void circle(int cx, int cy, int radius, Rgb c);
  void disc(int cx, int cy, int radius, Rgb c);
  const std::vector<uint8_t>& pixels() const { return rgb_; }

 private:
  int width_, height_;
  std::vector<uint8_t> rgb_;
};

void write_ppm(const Canvas& canvas, const std::string& path);

// Top-down frame: obstacles, goal region/sphere, reference path, robot pose
// and both scans.
Canvas render_frame(const WorldModel& world, const RobotState& state, const RobotParams& robot,
                    const std::vector<Vec2>& ref_path, const Vec2& goal, double d_h,
                    const std::vector<float>& scan_front, const std::vector<float>& scan_rear,
                    const LidarConfig& lidar_front, const LidarConfig& lidar_rear);

// One numbered PPM per trace step; returns the frame count.
int render_trace_frames(const EpisodeTrace& trace, const RobotParams& robot,
                        const LidarConfig& lidar_front, const LidarConfig& lidar_rear,
                        const std::string& out_dir);

// Simple line chart; one series per entry, shared x.
void plot_series(const std::vector<double>& x, const std::vector<std::vector<double>>& series,
                 const std::vector<Rgb>& colors, const std::string& path);

// Reward / success-rate / tolerance charts from a training CSV.
void render_training_plots(const std::string& csv_path, const std::string& out_dir);

}  // namespace wbc
