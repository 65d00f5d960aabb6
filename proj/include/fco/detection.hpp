#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "fco/common.hpp"
#include "fco/geometry.hpp"
#include "fco/scenario.hpp"

namespace fco {

/// Roof-mounted camera rig. Cameras are evenly spaced around the vehicle heading.
struct SensorConfig {
  double range = 50.0;
  int num_cameras = 4;
  double fov_per_camera_deg = 90.0;
  int silhouette_samples = 16;
  double visibility_threshold = 0.3;

  void validate() const;

  bool operator==(const SensorConfig&) const = default;
};

struct SensorPose {
  Vec2 origin = Vec2::Zero();
  double heading = 0.0;
};

struct DetectionRecord {
  double t = 0.0;
  IdSet detected_ids;  // includes the FCOs themselves

  bool operator==(const DetectionRecord&) const = default;
};

/// Detection records on a uniform time grid, one per frame.
struct DetectionSeries {
  double t_start = 0.0;
  double dt = 1.0;
  std::vector<DetectionRecord> records;

  /// Record at time t, or nullptr when t is off the grid or outside the series.
  const DetectionRecord* at(double t) const;

  bool operator==(const DetectionSeries&) const = default;
};

/// True when `p` lies inside the field of view of at least one camera.
bool in_field_of_view(const SensorPose& sensor, const Vec2& p, const SensorConfig& sensors);

/// Fraction of the target's perimeter samples that are in range, inside some camera's
/// field of view and connected to the sensor origin by an unobstructed segment. Touching
/// an occluder or building boundary counts as blocked. Throws InputError for a
/// zero-area target.
double visibility_fraction(const SensorPose& sensor, const VehiclePose& target,
                           std::span<const VehiclePose> occluders,
                           std::span<const geometry::Polygon> buildings, const SensorConfig& sensors);

/// FCOs inside the radius plus every vehicle inside the radius that some FCO inside the
/// radius sees at or above the visibility threshold.
DetectionRecord detect_frame(const Frame& frame, const SensorConfig& sensors,
                             std::span<const geometry::Polygon> buildings, const Vec2& center, double r);

/// detect_frame over every frame of the run, using the run's buildings, center and radius.
DetectionSeries detect_run(const Run& run, const SensorConfig& sensors);

/// CSV `t,id`, one row per detected vehicle, sorted by (t, id).
void export_detections(const DetectionSeries& series, const std::filesystem::path& path);
DetectionSeries import_detections(const std::filesystem::path& path, const ScenarioConfig& grid);

}  // namespace fco
