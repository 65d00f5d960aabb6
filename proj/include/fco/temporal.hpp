#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fco/detection.hpp"
#include "fco/scenario.hpp"

namespace fco {

/// Ids of vehicles whose centroid lies within distance r of center (boundary inclusive).
IdSet radius_filter(const Frame& frame, const Vec2& center, double r);

/// Number of records covered by a window of s seconds: s/dt + 1 (inclusive of t).
/// Throws WindowError unless s is a non-negative multiple of dt.
std::size_t window_steps(double s, double dt);

/// (union of detected ids over t-s, ..., t) intersected with v_t. Throws WindowError if
/// a record in the window is missing.
IdSet window_union(const DetectionSeries& records, const IdSet& v_t, double t, double s, double dt);

struct WindowedSets {
  double t = 0.0;
  double window_s = 0.0;
  IdSet v_t;
  IdSet v_d_t;
  IdSet v_s_t;

  std::size_t potential() const { return v_s_t.size() - v_d_t.size(); }
  /// Checks v_d_t within v_s_t within v_t; throws std::logic_error otherwise.
  void check() const;
};

WindowedSets windowed_sets(const Run& run, const DetectionSeries& records, std::size_t frame_index, double s);

struct DetectabilityDistribution {
  std::vector<double> times;
  std::vector<std::size_t> n_vt;
  std::vector<std::size_t> n_vdt;
  std::vector<double> ratios;  // |V_d,t| / |V_t|, frames with empty V_t skipped
  double mean = 0.0;
};

DetectabilityDistribution detectability_distribution(const Run& run, const DetectionSeries& records,
                                                     const Vec2& center, double r);

struct PotentialGrid {
  std::vector<double> penetrations;
  std::vector<double> window_lengths;
  Eigen::MatrixXd mean_potential;  // rows: penetrations, cols: window lengths
  Eigen::MatrixXd mean_absolute;
  std::vector<std::size_t> valid_timesteps;  // per penetration
};

/// Mean temporal enhancement potential per (penetration, window). All windows of one
/// penetration average over the same timesteps: those with |V_t| > 0 and a full history
/// for the longest window. Throws WindowError when the longest window exceeds the run.
PotentialGrid potential_grid(const Run& run, std::span<const DetectionSeries> records_per_penetration,
                             std::span<const double> penetrations, std::span<const double> window_lengths);

/// Reassigns FCOs for each penetration (seed = base_seed + index) and detects every frame.
std::vector<DetectionSeries> detect_penetrations(const Run& run, std::span<const double> penetrations,
                                                 const SensorConfig& sensors, std::uint64_t base_seed);

/// `penetration,s,mean_potential,mean_absolute`
void write_potential_csv(const PotentialGrid& grid, const std::filesystem::path& path);

/// `penetration,t,n_vt,n_vdt,ratio`, one row per qualifying timestep.
void write_distribution_csv(std::span<const double> penetrations,
                            std::span<const DetectabilityDistribution> distributions,
                            const std::filesystem::path& path);

}  // namespace fco
