#include "fco/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <random>

namespace fco {

namespace {

constexpr double kPi = std::numbers::pi;

// Exact rotation by k quarter turns.
Vec2 rotate_quarter(const Vec2& p, int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return p;
    case 1: return {-p.y(), p.x()};
    case 2: return {-p.x(), -p.y()};
    default: return {p.y(), -p.x()};
  }
}

int arm_index(Arm a) { return static_cast<int>(a); }
Arm arm_from_index(int k) { return static_cast<Arm>(((k % 4) + 4) % 4); }

constexpr double kMinGap = 1e-2;

}  // namespace

const VehiclePose* Frame::find(VehicleId id) const {
  auto it = std::lower_bound(vehicles.begin(), vehicles.end(), id,
                             [](const VehiclePose& v, VehicleId key) { return v.id < key; });
  return (it != vehicles.end() && it->id == id) ? &*it : nullptr;
}

IdSet Frame::ids() const {
  IdSet out;
  for (const auto& v : vehicles) out.insert(out.end(), v.id);
  return out;
}

double idm_acceleration(const IdmParams& p, double speed, std::optional<double> gap,
                        double leader_speed) {
  const double free_term = 1.0 - std::pow(speed / p.desired_speed, 4);
  if (!gap) return p.max_accel * free_term;
  const double s = std::max(*gap, kMinGap);
  const double dv = speed - leader_speed;
  const double s_star = p.min_gap + std::max(0.0, speed * p.time_headway +
                                                      speed * dv / (2.0 * std::sqrt(p.max_accel * p.comfort_decel)));
  return p.max_accel * (free_term - (s_star / s) * (s_star / s));
}

std::vector<SignalPhase> ScenarioConfig::default_signal_plan() {
  SignalPhase east_west{30.0, {true, false, true, false}};
  SignalPhase all_red{4.0, {false, false, false, false}};
  SignalPhase north_south{30.0, {false, true, false, true}};
  return {east_west, all_red, north_south, all_red};
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(t_end > t_start)) fail("t_end must exceed t_start");
  if (signal_plan.empty()) fail("signal plan is empty");
  for (const auto& phase : signal_plan) {
    if (!(phase.duration > 0.0)) fail("signal phase durations must be positive");
  }
  if (!(penetration_rate >= 0.0 && penetration_rate <= 1.0)) fail("penetration_rate must be in [0,1]");
  if (lanes_per_arm < 1) fail("lanes_per_arm must be >= 1");
  if (!(lane_width > 0.0)) fail("lane_width must be positive");
  if (!(arm_length > road_half_width())) fail("arm_length must exceed the road half width");
  if (!(radius > 0.0)) fail("radius must be positive");
  if (!(entry_jitter_std >= 0.0)) fail("entry_jitter_std must be non-negative");
  for (double q : demand) {
    if (!(q >= 0.0) || !std::isfinite(q)) fail("demand must be non-negative");
  }
  if (!(vehicle_length > 0.0 && vehicle_width > 0.0)) fail("vehicle dimensions must be positive");
  if (!(idm.desired_speed > 0.0 && idm.time_headway >= 0.0 && idm.max_accel > 0.0 &&
        idm.comfort_decel > 0.0 && idm.min_gap >= 0.0)) {
    fail("invalid car-following parameters");
  }
  if (!(p_straight >= 0.0 && p_left >= 0.0 && p_right >= 0.0) ||
      !(p_straight + p_left + p_right > 0.0)) {
    fail("turn probabilities must be non-negative with a positive sum");
  }
  for (const auto& b : explicit_buildings) {
    if (b.size() < 3) fail("building polygons need at least three vertices");
  }
}

std::size_t ScenarioConfig::frame_count() const {
  return static_cast<std::size_t>(std::floor((t_end - t_start) / dt + 1e-9)) + 1;
}

std::vector<geometry::Polygon> ScenarioConfig::buildings() const {
  if (!explicit_buildings.empty() || !corner_buildings) return explicit_buildings;
  const double near = road_half_width() + building_setback;
  const double far = near + building_size;
  std::vector<geometry::Polygon> out;
  for (int k = 0; k < 4; ++k) {
    geometry::Polygon block = geometry::axis_aligned_box(Vec2(near, near), Vec2(far, far));
    for (auto& p : block) p = rotate_quarter(p, k) + center;
    out.push_back(std::move(block));
  }
  return out;
}

bool is_green(const ScenarioConfig& config, Arm arm, double t) {
  double cycle = 0.0;
  for (const auto& phase : config.signal_plan) cycle += phase.duration;
  double tau = std::fmod(t - config.t_start, cycle);
  if (tau < 0.0) tau += cycle;
  for (const auto& phase : config.signal_plan) {
    if (tau < phase.duration) return phase.green[static_cast<std::size_t>(arm_index(arm))];
    tau -= phase.duration;
  }
  return config.signal_plan.back().green[static_cast<std::size_t>(arm_index(arm))];
}

Route::Route(const ScenarioConfig& config, Arm entry, int lane, Turn turn) : entry_(entry), lane_(lane) {
  const double hw = config.road_half_width();
  const double len = config.arm_length;
  const double o = (lane + 0.5) * config.lane_width;
  const int k = arm_index(entry);

  // Built for the East approach (heading west), then rotated onto the entry arm.
  std::vector<Segment> canon;
  auto line = [](Vec2 a, Vec2 b) {
    Segment s;
    s.a = a;
    s.b = b;
    s.length = (b - a).norm();
    return s;
  };
  auto arc = [](Vec2 c, double r, double start, double sweep) {
    Segment s;
    s.arc = true;
    s.a = c;
    s.radius = r;
    s.start_angle = start;
    s.sweep = sweep;
    s.length = r * std::abs(sweep);
    return s;
  };

  canon.push_back(line({len, o}, {hw, o}));
  switch (turn) {
    case Turn::Straight:
      canon.push_back(line({hw, o}, {-hw, o}));
      canon.push_back(line({-hw, o}, {-len, o}));
      exit_ = arm_from_index(k + 2);
      break;
    case Turn::Right:
      canon.push_back(arc({hw, hw}, hw - o, -kPi / 2, -kPi / 2));
      canon.push_back(line({o, hw}, {o, len}));
      exit_ = arm_from_index(k + 1);
      break;
    case Turn::Left:
      canon.push_back(arc({hw, -hw}, hw + o, kPi / 2, kPi / 2));
      canon.push_back(line({-o, -hw}, {-o, -len}));
      exit_ = arm_from_index(k + 3);
      break;
  }
  for (auto seg : canon) {
    seg.a = rotate_quarter(seg.a, k) + config.center;
    seg.b = rotate_quarter(seg.b, k) + config.center;
    seg.start_angle += k * kPi / 2;
    segments_.push_back(seg);
  }
  stop_line_ = segments_[0].length;
  exit_start_ = segments_[0].length + segments_[1].length;
  length_ = exit_start_ + segments_[2].length;
}

std::pair<Vec2, double> Route::at(double s) const {
  s = std::clamp(s, 0.0, length_);
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& seg = segments_[i];
    if (s > seg.length && i + 1 < segments_.size()) {
      s -= seg.length;
      continue;
    }
    if (!seg.arc) {
      const Vec2 dir = (seg.b - seg.a) / seg.length;
      return {seg.a + s * dir, geometry::normalize_angle(std::atan2(dir.y(), dir.x()))};
    }
    const double sign = seg.sweep > 0 ? 1.0 : -1.0;
    const double theta = seg.start_angle + sign * s / seg.radius;
    const Vec2 p = seg.a + seg.radius * Vec2(std::cos(theta), std::sin(theta));
    return {p, geometry::normalize_angle(theta + sign * kPi / 2)};
  }
  return {segments_.back().b, 0.0};
}

std::vector<ScheduledEntry> schedule_entries(const ScenarioConfig& config) {
  config.validate();
  std::mt19937_64 rng(derive_seed(config.seed, 0));
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> lane_pick(0, config.lanes_per_arm - 1);
  const double p_sum = config.p_straight + config.p_left + config.p_right;

  std::vector<ScheduledEntry> out;
  for (Arm arm : kArms) {
    const double q = config.demand[static_cast<std::size_t>(arm_index(arm))];
    if (q <= 0.0) continue;
    const double headway = 3600.0 / q;
    for (std::size_t i = 0;; ++i) {
      const double nominal = config.t_start + static_cast<double>(i) * headway;
      if (nominal > config.t_end) break;
      ScheduledEntry e;
      e.nominal_time = nominal;
      const double noise = jitter(rng);
      e.time = std::max(config.t_start, nominal + config.entry_jitter_std * noise);
      e.arm = arm;
      e.lane = lane_pick(rng);
      const double u = unit(rng) * p_sum;
      e.turn = u < config.p_straight ? Turn::Straight
               : u < config.p_straight + config.p_left ? Turn::Left
                                                        : Turn::Right;
      out.push_back(e);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ScheduledEntry& a, const ScheduledEntry& b) {
    return a.time < b.time;
  });
  return out;
}

namespace {

struct SimVehicle {
  VehicleId id;
  Route route;
  double s;  // centroid arc length
  double v;
  double length;
  double width;
};

struct Leader {
  std::optional<double> gap;
  double speed = 0.0;

  void offer(double g, double v) {
    if (!gap || g < *gap) {
      gap = g;
      speed = v;
    }
  }
};

}  // namespace

Run build_and_run(const ScenarioConfig& config) {
  config.validate();
  const auto schedule = schedule_entries(config);
  const std::size_t n_frames = config.frame_count();
  const double dt = config.dt;
  const double v_max = config.idm.desired_speed;

  Run run;
  run.config = config;
  run.frames.reserve(n_frames);

  // Pending insertions per (arm, lane), FIFO in schedule order.
  std::map<std::pair<int, int>, std::deque<ScheduledEntry>> pending;
  std::size_t next_entry = 0;
  std::vector<SimVehicle> active;
  std::uint64_t next_id = 0;

  for (std::size_t step = 0; step < n_frames; ++step) {
    const double t = config.frame_time(step);

    while (next_entry < schedule.size() && schedule[next_entry].time <= t + 1e-9) {
      const auto& e = schedule[next_entry++];
      pending[{arm_index(e.arm), e.lane}].push_back(e);
    }
    for (auto& [key, queue] : pending) {
      while (!queue.empty()) {
        const auto& e = queue.front();
        // Nearest upstream vehicle on the same approach lane.
        const SimVehicle* last = nullptr;
        for (const auto& v : active) {
          if (arm_index(v.route.entry_arm()) == key.first && v.route.lane() == key.second &&
              (last == nullptr || v.s < last->s)) {
            last = &v;
          }
        }
        const double s_new = 0.5 * config.vehicle_length;
        double speed = v_max;
        if (last != nullptr) {
          const double gap = (last->s - 0.5 * last->length) - (s_new + 0.5 * config.vehicle_length);
          if (gap < config.idm.min_gap) break;
          if (gap < 50.0) speed = std::min(v_max, last->v);
        }
        active.push_back({VehicleId{next_id++}, Route(config, e.arm, e.lane, e.turn), s_new, speed,
                          config.vehicle_length, config.vehicle_width});
        queue.pop_front();
      }
    }

    Frame frame;
    frame.t = t;
    frame.vehicles.reserve(active.size());
    for (const auto& v : active) {
      auto [pos, heading] = v.route.at(v.s);
      frame.vehicles.push_back({v.id, pos, heading, v.length, v.width, v.v});
    }
    std::sort(frame.vehicles.begin(), frame.vehicles.end(),
              [](const VehiclePose& a, const VehiclePose& b) { return a.id < b.id; });
    run.frames.push_back(std::move(frame));
    if (step + 1 == n_frames) break;

    // Parallel update: accelerations from the state at t, signal state at t.
    std::vector<double> accel(active.size());
    std::vector<bool> held(active.size(), false);
    for (std::size_t i = 0; i < active.size(); ++i) {
      const auto& me = active[i];
      Leader leader;
      const double my_exit = me.s - me.route.exit_start();
      for (std::size_t j = 0; j < active.size(); ++j) {
        if (i == j) continue;
        const auto& other = active[j];
        const double half = 0.5 * (me.length + other.length);
        const bool same_entry = other.route.entry_arm() == me.route.entry_arm() &&
                                other.route.lane() == me.route.lane();
        if (same_entry && me.s < me.route.exit_start() && other.s < other.route.exit_start() && other.s > me.s) {
          leader.offer(other.s - me.s - half, other.v);
        }
        const bool same_exit = other.route.exit_arm() == me.route.exit_arm() &&
                               other.route.lane() == me.route.lane();
        const double other_exit = other.s - other.route.exit_start();
        if (same_exit && other.s >= other.route.stop_line() && other_exit > my_exit) {
          leader.offer(other_exit - my_exit - half, other.v);
        }
      }
      const double front = me.s + 0.5 * me.length;
      if (!is_green(config, me.route.entry_arm(), t) && front <= me.route.stop_line() + 1e-9) {
        leader.offer(me.route.stop_line() - front, 0.0);
        held[i] = true;
      }
      accel[i] = idm_acceleration(config.idm, me.v, leader.gap, leader.speed);
    }

    for (std::size_t i = 0; i < active.size(); ++i) {
      auto& me = active[i];
      const double a = accel[i];
      double v_new = me.v + a * dt;
      double ds;
      if (v_new < 0.0) {
        ds = a < 0.0 ? -me.v * me.v / (2.0 * a) : 0.0;
        v_new = 0.0;
      } else {
        v_new = std::min(v_new, v_max);
        ds = 0.5 * (me.v + v_new) * dt;
      }
      me.s += ds;
      me.v = v_new;
      if (held[i] && me.s + 0.5 * me.length > me.route.stop_line()) {
        me.s = me.route.stop_line() - 0.5 * me.length;
        me.v = 0.0;
      }
    }
    std::erase_if(active, [](const SimVehicle& v) { return v.s >= v.route.length(); });
  }
  return run;
}

bool is_fco(VehicleId id, double penetration_rate, std::uint64_t seed) {
  const std::uint64_t h = derive_seed(seed, to_underlying(id));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < penetration_rate;
}

Run assign_fcos(Run run, double penetration_rate, std::uint64_t seed) {
  if (!(penetration_rate >= 0.0 && penetration_rate <= 1.0)) {
    throw ConfigError("penetration rate must be in [0,1]");
  }
  for (auto& frame : run.frames) {
    frame.fco_ids.clear();
    for (const auto& v : frame.vehicles) {
      if (is_fco(v.id, penetration_rate, seed)) frame.fco_ids.insert(v.id);
    }
  }
  run.config.penetration_rate = penetration_rate;
  return run;
}

}  // namespace fco
