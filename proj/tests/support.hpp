#pragma once

// Shared generators and brute-force oracles for the unit, property and acceptance tests.
// Oracles deliberately avoid the library's helpers so they check it independently.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fco/bev.hpp"
#include "fco/detection.hpp"
#include "fco/scenario.hpp"

namespace fco::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  VehiclePose pose(std::uint64_t id, double extent, double min_dim = 0.5, double max_dim = 8.0) {
    VehiclePose v;
    v.id = VehicleId{id};
    v.position = Vec2(uniform(-extent, extent), uniform(-extent, extent));
    v.heading = uniform(0.0, 6.283185307179586);
    v.length = uniform(min_dim, max_dim);
    v.width = uniform(min_dim, v.length);
    v.speed = uniform(0.0, 14.0);
    return v;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Point inside the rectangle spanned by its four corners, via edge half-planes.
inline bool oracle_inside(const VehiclePose& v, double px, double py) {
  const double c = std::cos(v.heading), s = std::sin(v.heading);
  const double hl = 0.5 * v.length, hw = 0.5 * v.width;
  const double cx[4] = {v.position.x() + c * hl - s * hw, v.position.x() + c * hl + s * hw,
                        v.position.x() - c * hl + s * hw, v.position.x() - c * hl - s * hw};
  const double cy[4] = {v.position.y() + s * hl + c * hw, v.position.y() + s * hl - c * hw,
                        v.position.y() - s * hl - c * hw, v.position.y() - s * hl + c * hw};
  // Corners are listed clockwise, so interior points lie right of (or on) every edge.
  for (int k = 0; k < 4; ++k) {
    const int n = (k + 1) % 4;
    const double cr = (cx[n] - cx[k]) * (py - cy[k]) - (cy[n] - cy[k]) * (px - cx[k]);
    if (cr > 0.0) return false;
  }
  return true;
}

// Pixel-center sweep over the whole grid.
inline std::vector<std::vector<int>> oracle_raster(const std::vector<VehiclePose>& poses, int size,
                                                   double cx, double cy, double radius) {
  std::vector<std::vector<int>> out(size, std::vector<int>(size, 0));
  const double mpp = 2.0 * radius / size;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double x = cx + (j + 0.5 - size / 2.0) * mpp;
      const double y = cy + (size / 2.0 - (i + 0.5)) * mpp;
      for (const auto& v : poses) {
        if (oracle_inside(v, x, y)) {
          out[i][j] = 1;
          break;
        }
      }
    }
  }
  return out;
}

inline bool same_raster(const BinaryGrid& grid, const std::vector<std::vector<int>>& oracle) {
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    for (std::size_t j = 0; j < oracle[i].size(); ++j) {
      if (grid.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != oracle[i][j]) return false;
    }
  }
  return true;
}

/// Hand-built run with a fixed vehicle set per frame on the grid t = 0, 1, ..., n-1.
inline Run manual_run(std::vector<std::vector<VehiclePose>> frames, double radius = 100.0) {
  Run run;
  run.config.t_start = 0.0;
  run.config.dt = 1.0;
  run.config.t_end = static_cast<double>(frames.size() - 1);
  run.config.radius = radius;
  run.config.corner_buildings = false;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    Frame f;
    f.t = static_cast<double>(k);
    f.vehicles = std::move(frames[k]);
    run.frames.push_back(std::move(f));
  }
  return run;
}

inline DetectionSeries manual_records(const std::vector<std::vector<std::uint64_t>>& detected) {
  DetectionSeries s;
  s.t_start = 0.0;
  s.dt = 1.0;
  for (std::size_t k = 0; k < detected.size(); ++k) {
    DetectionRecord r;
    r.t = static_cast<double>(k);
    for (auto id : detected[k]) r.detected_ids.insert(VehicleId{id});
    s.records.push_back(std::move(r));
  }
  return s;
}

inline VehiclePose make_pose(std::uint64_t id, double x, double y, double heading = 0.0, double length = 4.5,
                             double width = 1.8, double speed = 0.0) {
  VehiclePose v;
  v.id = VehicleId{id};
  v.position = Vec2(x, y);
  v.heading = heading;
  v.length = length;
  v.width = width;
  v.speed = speed;
  return v;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("fcobench_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fco::testing
