#include "fco/detection.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fco/parallel.hpp"
#include "fco/temporal.hpp"
#include "fco/text.hpp"

namespace fco {

void SensorConfig::validate() const {
  if (!(range > 0.0)) throw ConfigError("sensor range must be positive");
  if (num_cameras < 1 || num_cameras > 4) throw ConfigError("num_cameras must be in 1..4");
  if (!(fov_per_camera_deg > 0.0 && fov_per_camera_deg <= 360.0)) throw ConfigError("fov must be in (0, 360]");
  if (silhouette_samples < 4) throw ConfigError("silhouette_samples must be >= 4");
  if (!(visibility_threshold > 0.0 && visibility_threshold <= 1.0)) {
    throw ConfigError("visibility_threshold must be in (0, 1]");
  }
}

const DetectionRecord* DetectionSeries::at(double t) const {
  const double k_real = (t - t_start) / dt;
  const long long k = std::llround(k_real);
  if (k < 0 || static_cast<std::size_t>(k) >= records.size()) return nullptr;
  const auto& rec = records[static_cast<std::size_t>(k)];
  if (std::abs(rec.t - t) > 1e-9 * std::max(1.0, std::abs(t))) return nullptr;
  return &rec;
}

bool in_field_of_view(const SensorPose& sensor, const Vec2& p, const SensorConfig& sensors) {
  if (sensors.fov_per_camera_deg >= 360.0) return true;
  const Vec2 d = p - sensor.origin;
  if (d.squaredNorm() == 0.0) return true;
  const double bearing = std::atan2(d.y(), d.x());
  const double half_fov = 0.5 * sensors.fov_per_camera_deg * std::numbers::pi / 180.0;
  for (int c = 0; c < sensors.num_cameras; ++c) {
    const double axis = sensor.heading + 2.0 * std::numbers::pi * c / sensors.num_cameras;
    if (std::abs(geometry::angle_difference(bearing, axis)) <= half_fov + 1e-12) return true;
  }
  return false;
}

double visibility_fraction(const SensorPose& sensor, const VehiclePose& target,
                           std::span<const VehiclePose> occluders,
                           std::span<const geometry::Polygon> buildings, const SensorConfig& sensors) {
  if (!(target.length > 0.0 && target.width > 0.0)) {
    throw InputError("target footprint has zero area");
  }
  const auto rect = target.footprint();
  const auto samples = geometry::perimeter_samples(rect, sensors.silhouette_samples);
  std::vector<geometry::OrientedRect> blockers;
  blockers.reserve(occluders.size());
  for (const auto& o : occluders) blockers.push_back(o.footprint());

  int visible = 0;
  for (const auto& p : samples) {
    if ((p - sensor.origin).norm() > sensors.range) continue;
    if (!in_field_of_view(sensor, p, sensors)) continue;
    bool blocked = false;
    for (const auto& b : blockers) {
      if (geometry::segment_intersects_rect(sensor.origin, p, b)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) {
      for (const auto& poly : buildings) {
        if (geometry::segment_intersects_polygon(sensor.origin, p, poly)) {
          blocked = true;
          break;
        }
      }
    }
    if (!blocked) ++visible;
  }
  return static_cast<double>(visible) / sensors.silhouette_samples;
}

DetectionRecord detect_frame(const Frame& frame, const SensorConfig& sensors,
                             std::span<const geometry::Polygon> buildings, const Vec2& center, double r) {
  DetectionRecord record;
  record.t = frame.t;
  const IdSet in_radius = radius_filter(frame, center, r);
  std::vector<const VehiclePose*> observers;
  for (VehicleId id : frame.fco_ids) {
    if (in_radius.contains(id)) {
      record.detected_ids.insert(id);
      if (const auto* pose = frame.find(id)) observers.push_back(pose);
    }
  }
  std::vector<VehiclePose> occluders;
  for (VehicleId target_id : in_radius) {
    if (record.detected_ids.contains(target_id)) continue;
    const VehiclePose& target = *frame.find(target_id);
    const auto target_rect = target.footprint();
    for (const auto* fco : observers) {
      const SensorPose sensor{fco->position, fco->heading};
      if (geometry::point_rect_distance(sensor.origin, target_rect) > sensors.range) continue;
      // Only vehicles near the sight line can block a ray to a target sample point.
      const double reach = target_rect.circumradius();
      occluders.clear();
      for (const auto& v : frame.vehicles) {
        if (v.id == fco->id || v.id == target_id) continue;
        const double d = geometry::point_segment_distance(v.position, sensor.origin, target.position);
        if (d <= reach + v.footprint().circumradius() + 1e-9) occluders.push_back(v);
      }
      if (visibility_fraction(sensor, target, occluders, buildings, sensors) >= sensors.visibility_threshold) {
        record.detected_ids.insert(target_id);
        break;
      }
    }
  }
  return record;
}

DetectionSeries detect_run(const Run& run, const SensorConfig& sensors) {
  sensors.validate();
  DetectionSeries series;
  series.t_start = run.config.t_start;
  series.dt = run.config.dt;
  series.records.resize(run.frames.size());
  const auto buildings = run.config.buildings();
  parallel_for(run.frames.size(), [&](std::size_t k) {
    series.records[k] = detect_frame(run.frames[k], sensors, buildings, run.config.center, run.config.radius);
  });
  return series;
}

void export_detections(const DetectionSeries& series, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "t,id\n";
  for (const auto& rec : series.records) {
    const std::string t = text::format_double(rec.t);
    for (VehicleId id : rec.detected_ids) out << t << ',' << to_underlying(id) << '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write detections file " + path.string());
  file << out.str();
  if (!file) throw IoError("write failed for " + path.string());
}

DetectionSeries import_detections(const std::filesystem::path& path, const ScenarioConfig& grid) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open detections file " + path.string());
  DetectionSeries series;
  series.t_start = grid.t_start;
  series.dt = grid.dt;
  series.records.resize(grid.frame_count());
  for (std::size_t k = 0; k < series.records.size(); ++k) series.records[k].t = grid.frame_time(k);

  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "t,id") throw ParseError(1, "expected header 't,id'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != 2) throw ParseError(line_no, "expected 2 fields");
    double t = 0.0;
    VehicleId id{};
    try {
      t = text::parse_double(fields[0]);
      id = VehicleId{text::parse_uint(fields[1])};
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    const long long k = std::llround((t - grid.t_start) / grid.dt);
    if (k < 0 || static_cast<std::size_t>(k) >= series.records.size()) {
      throw ParseError(line_no, "timestamp outside the run's time grid");
    }
    auto& rec = series.records[static_cast<std::size_t>(k)];
    if (std::abs(rec.t - t) > 1e-9 * std::max(1.0, std::abs(t))) {
      throw ParseError(line_no, "timestamp is not on the run's time grid");
    }
    if (!rec.detected_ids.insert(id).second) throw ParseError(line_no, "duplicate (t, id) row");
  }
  return series;
}

}  // namespace fco
