#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "fco/common.hpp"
#include "fco/geometry.hpp"

namespace fco {

/// Intersection arms, counter-clockwise from +x. Arm k points along angle k*pi/2.
enum class Arm : int { East = 0, North = 1, West = 2, South = 3 };
inline constexpr std::array<Arm, 4> kArms = {Arm::East, Arm::North, Arm::West, Arm::South};

enum class Turn : int { Straight = 0, Left = 1, Right = 2 };

struct VehiclePose {
  VehicleId id{};
  Vec2 position = Vec2::Zero();
  double heading = 0.0;  // radians CCW from +x, in [0, 2*pi)
  double length = 4.5;
  double width = 1.8;
  double speed = 0.0;

  geometry::OrientedRect footprint() const { return {position, heading, length, width}; }

  bool operator==(const VehiclePose&) const = default;
};

struct Frame {
  double t = 0.0;
  std::vector<VehiclePose> vehicles;  // sorted by id, ids unique
  IdSet fco_ids;

  const VehiclePose* find(VehicleId id) const;
  IdSet ids() const;

  bool operator==(const Frame&) const = default;
};

struct SignalPhase {
  double duration = 30.0;
  std::array<bool, 4> green{};  // indexed by Arm

  bool operator==(const SignalPhase&) const = default;
};

struct IdmParams {
  double desired_speed = 13.9;  // v0, m/s
  double time_headway = 1.5;    // T, s
  double max_accel = 1.5;       // a, m/s^2
  double comfort_decel = 2.0;   // b, m/s^2
  double min_gap = 2.0;         // s0, m

  bool operator==(const IdmParams&) const = default;
};

/// IDM acceleration for a follower at `speed` behind a leader `gap` meters ahead
/// (bumper to bumper) moving at `leader_speed`. A missing leader means free road.
double idm_acceleration(const IdmParams& p, double speed, std::optional<double> gap,
                        double leader_speed);

struct ScenarioConfig {
  double arm_length = 150.0;
  int lanes_per_arm = 1;
  double lane_width = 3.5;
  std::vector<SignalPhase> signal_plan = default_signal_plan();
  std::array<double, 4> demand = {400.0, 400.0, 400.0, 400.0};  // veh/h per arm
  double entry_jitter_std = 15.0;
  double penetration_rate = 0.1;
  double radius = 100.0;
  Vec2 center = Vec2::Zero();
  double t_start = 0.0;
  double t_end = 600.0;
  double dt = 1.0;
  std::uint64_t seed = 1;

  // Explicit building polygons; when empty and corner_buildings is set, four corner
  // blocks are generated from the setback/size below.
  std::vector<geometry::Polygon> explicit_buildings;
  bool corner_buildings = true;
  double building_setback = 15.0;
  double building_size = 60.0;

  IdmParams idm;
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;
  double p_straight = 0.6;
  double p_left = 0.2;
  double p_right = 0.2;

  static std::vector<SignalPhase> default_signal_plan();

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  double road_half_width() const { return lanes_per_arm * lane_width; }
  std::size_t frame_count() const;
  double frame_time(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
  std::vector<geometry::Polygon> buildings() const;

  bool operator==(const ScenarioConfig&) const = default;
};

bool is_green(const ScenarioConfig& config, Arm arm, double t);

/// Piecewise path through the intersection, parameterized by arc length.
class Route {
 public:
  Route(const ScenarioConfig& config, Arm entry, int lane, Turn turn);

  double length() const { return length_; }
  /// Arc length of the stop line (end of the approach lane).
  double stop_line() const { return stop_line_; }
  /// Arc length where the exit lane begins.
  double exit_start() const { return exit_start_; }
  Arm entry_arm() const { return entry_; }
  Arm exit_arm() const { return exit_; }
  int lane() const { return lane_; }

  /// Position and heading at arc length s (clamped to the route).
  std::pair<Vec2, double> at(double s) const;

 private:
  struct Segment {
    bool arc = false;
    Vec2 a = Vec2::Zero();  // line start, or arc center
    Vec2 b = Vec2::Zero();  // line end
    double radius = 0.0;
    double start_angle = 0.0;
    double sweep = 0.0;  // signed radians
    double length = 0.0;
  };

  Arm entry_;
  Arm exit_;
  int lane_;
  std::vector<Segment> segments_;
  double length_ = 0.0;
  double stop_line_ = 0.0;
  double exit_start_ = 0.0;
};

struct ScheduledEntry {
  double nominal_time = 0.0;
  double time = 0.0;  // jittered, clamped to >= t_start
  Arm arm = Arm::East;
  int lane = 0;
  Turn turn = Turn::Straight;
};

/// Entry schedule in insertion order. Deterministic given config.seed.
std::vector<ScheduledEntry> schedule_entries(const ScenarioConfig& config);

struct Run {
  ScenarioConfig config;
  std::vector<Frame> frames;

  bool operator==(const Run&) const = default;
};

/// Simulates the configured intersection. Throws ConfigError for invalid configs.
Run build_and_run(const ScenarioConfig& config);

/// Marks each distinct vehicle as an FCO with probability `penetration_rate`. Membership
/// is a pure function of (seed, id), so it is constant over the vehicle's lifetime.
Run assign_fcos(Run run, double penetration_rate, std::uint64_t seed);
bool is_fco(VehicleId id, double penetration_rate, std::uint64_t seed);

/// Trajectory CSV: `t,id,x,y,heading,length,width,speed,is_fco`, rows sorted by (t, id).
void export_run(const Run& run, const std::filesystem::path& path);

/// Reads a trajectory file onto the time grid of `config` (frames without rows come back
/// empty). Throws ParseError with the line number for malformed content.
Run import_run(const std::filesystem::path& path, const ScenarioConfig& config);

/// Reads a trajectory file, inferring the time grid from the timestamps present.
Run import_run(const std::filesystem::path& path);

}  // namespace fco
