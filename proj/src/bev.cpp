#include <algorithm>
#include <cmath>

#include "fco/bev.hpp"
#include "fco/temporal.hpp"
#include "fco/text.hpp"

namespace fco {

void GridSpec::validate() const {
  if (size_px <= 0) throw ConfigError("grid size must be positive");
  if (!(radius > 0.0)) throw ConfigError("grid radius must be positive");
}

Vec2 GridSpec::pixel_center(int row, int col) const {
  const double mpp = meters_per_pixel();
  const double half = 0.5 * size_px;
  return center + Vec2((col + 0.5 - half) * mpp, (half - (row + 0.5)) * mpp);
}

std::pair<int, int> GridSpec::world_to_pixel(const Vec2& p) const {
  const double mpp = meters_per_pixel();
  const double half = 0.5 * size_px;
  const int col = static_cast<int>(std::floor((p.x() - center.x()) / mpp + half));
  const int row = static_cast<int>(std::floor(half - (p.y() - center.y()) / mpp));
  return {row, col};
}

std::vector<Pixel> footprint_pixels(const VehiclePose& pose, const GridSpec& spec) {
  if (!(pose.length > 0.0 && pose.width > 0.0)) throw InputError("vehicle dimensions must be positive");
  const auto rect = pose.footprint();
  const auto corners = rect.corners();
  double min_x = corners[0].x(), max_x = min_x, min_y = corners[0].y(), max_y = min_y;
  for (const auto& c : corners) {
    min_x = std::min(min_x, c.x());
    max_x = std::max(max_x, c.x());
    min_y = std::min(min_y, c.y());
    max_y = std::max(max_y, c.y());
  }
  // Pixel window around the bounding box, padded by one pixel against rounding.
  const auto [row_top, col_left] = spec.world_to_pixel(Vec2(min_x, max_y));
  const auto [row_bottom, col_right] = spec.world_to_pixel(Vec2(max_x, min_y));
  const int r0 = std::max(0, row_top - 1);
  const int r1 = std::min(spec.size_px - 1, row_bottom + 1);
  const int c0 = std::max(0, col_left - 1);
  const int c1 = std::min(spec.size_px - 1, col_right + 1);

  std::vector<Pixel> out;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (rect.contains(spec.pixel_center(r, c))) out.push_back({r, c});
    }
  }
  return out;
}

Footprint footprint_mask(const VehiclePose& pose, const GridSpec& spec) {
  Footprint fp{BinaryGrid::zeros(spec), 0};
  for (const auto& px : footprint_pixels(pose, spec)) {
    fp.mask.data(px.row, px.col) = 1;
    ++fp.pixel_count;
  }
  return fp;
}

BinaryGrid rasterize(std::span<const VehiclePose> poses, const GridSpec& spec) {
  spec.validate();
  BinaryGrid grid = BinaryGrid::zeros(spec);
  for (const auto& pose : poses) {
    for (const auto& px : footprint_pixels(pose, spec)) grid.data(px.row, px.col) = 1;
  }
  return grid;
}

IdSet pose_ids(std::span<const VehiclePose> poses) {
  IdSet out;
  for (const auto& p : poses) out.insert(p.id);
  return out;
}

namespace {

std::vector<VehiclePose> poses_of(const Frame& frame, const IdSet& ids) {
  std::vector<VehiclePose> out;
  out.reserve(ids.size());
  for (VehicleId id : ids) {
    if (const auto* p = frame.find(id)) out.push_back(*p);
  }
  return out;
}

}  // namespace

SequenceSample make_sample(const Run& run, const DetectionSeries& records, double t, double s,
                           const GridSpec& spec, int run_id) {
  spec.validate();
  const double dt = run.config.dt;
  const std::size_t steps = window_steps(s, dt);
  if (t - s < run.config.t_start - 1e-9 * std::max(1.0, std::abs(t))) {
    throw WindowError("window starts before the run at t=" + text::format_double(t));
  }
  const long long k_now = std::llround((t - run.config.t_start) / dt);
  if (k_now < 0 || static_cast<std::size_t>(k_now) >= run.frames.size()) {
    throw WindowError("no frame at t=" + text::format_double(t));
  }
  const std::size_t now = static_cast<std::size_t>(k_now);

  SequenceSample sample;
  sample.run_id = run_id;
  sample.t = run.frames[now].t;
  sample.s = s;
  sample.dt = dt;
  sample.spec = spec;

  const auto sets = windowed_sets(run, records, now, s);
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t idx = now + 1 - steps + k;
    const Frame& frame = run.frames[idx];
    const IdSet v = radius_filter(frame, run.config.center, run.config.radius);
    const auto* rec = records.at(frame.t);
    if (rec == nullptr) throw WindowError("missing detection record at t=" + text::format_double(frame.t));
    IdSet detected;
    std::set_intersection(rec->detected_ids.begin(), rec->detected_ids.end(), v.begin(), v.end(),
                          std::inserter(detected, detected.end()));
    auto poses = poses_of(frame, detected);
    sample.frames.push_back(rasterize(poses, spec));
    sample.history.push_back(std::move(poses));
  }
  sample.detected = poses_of(run.frames[now], sets.v_d_t);
  sample.window_set = poses_of(run.frames[now], sets.v_s_t);
  sample.target = rasterize(sample.window_set, spec);
  sample.n_vt = sets.v_t.size();
  return sample;
}

}  // namespace fco
