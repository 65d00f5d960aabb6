#include "fco/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fco/text.hpp"

namespace fco {

namespace {

constexpr std::array<char, 4> kArmLetters = {'E', 'N', 'W', 'S'};

int arm_from_letter(std::string_view s) {
  for (std::size_t i = 0; i < kArmLetters.size(); ++i) {
    if (s.size() == 1 && s[0] == kArmLetters[i]) return static_cast<int>(i);
  }
  throw ConfigError("unknown arm '" + std::string(s) + "' (expected E, N, W or S)");
}

Vec2 parse_point(std::string_view s) {
  const auto xy = text::split(s, ',');
  if (xy.size() != 2) throw ConfigError("expected x,y but got '" + std::string(s) + "'");
  return {text::parse_double(xy[0]), text::parse_double(xy[1])};
}

SignalPhase parse_phase(std::string_view value) {
  const auto parts = text::split(value, ';');
  if (parts.size() != 2) throw ConfigError("signal phase must be 'seconds;ARMS'");
  SignalPhase phase;
  phase.duration = text::parse_double(parts[0]);
  const auto arms = text::trim(parts[1]);
  if (!arms.empty()) {
    for (auto a : text::split(arms, ',')) phase.green[static_cast<std::size_t>(arm_from_letter(text::trim(a)))] = true;
  }
  return phase;
}

geometry::Polygon parse_polygon(std::string_view value) {
  geometry::Polygon poly;
  for (auto p : text::split(value, ';')) {
    if (text::trim(p).empty()) continue;
    poly.push_back(parse_point(p));
  }
  return poly;
}

bool parse_bool(std::string_view s) {
  s = text::trim(s);
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw ConfigError("expected a boolean but got '" + std::string(s) + "'");
}

std::string point_text(const Vec2& p) { return text::format_double(p.x()) + "," + text::format_double(p.y()); }

}  // namespace

BenchConfig parse_config(std::string_view input) {
  BenchConfig cfg;
  auto& sc = cfg.scenario;
  auto& se = cfg.sensors;
  std::map<long long, SignalPhase> phases;
  std::map<long long, geometry::Polygon> buildings;

  auto number = [](double& field) { return [&field](std::string_view v) { field = text::parse_double(v); }; };
  auto integer = [](int& field) { return [&field](std::string_view v) { field = static_cast<int>(text::parse_int(v)); }; };
  const std::map<std::string, std::function<void(std::string_view)>, std::less<>> handlers = {
      {"arm_length", number(sc.arm_length)},
      {"lanes_per_arm", integer(sc.lanes_per_arm)},
      {"lane_width", number(sc.lane_width)},
      {"demand", [&](std::string_view v) { sc.demand.fill(text::parse_double(v)); }},
      {"demand.E", number(sc.demand[0])},
      {"demand.N", number(sc.demand[1])},
      {"demand.W", number(sc.demand[2])},
      {"demand.S", number(sc.demand[3])},
      {"entry_jitter_std", number(sc.entry_jitter_std)},
      {"penetration_rate", number(sc.penetration_rate)},
      {"radius", number(sc.radius)},
      {"center", [&](std::string_view v) { sc.center = parse_point(v); }},
      {"t_start", number(sc.t_start)},
      {"t_end", number(sc.t_end)},
      {"dt", number(sc.dt)},
      {"seed", [&](std::string_view v) { sc.seed = text::parse_uint(v); }},
      {"corner_buildings", [&](std::string_view v) { sc.corner_buildings = parse_bool(v); }},
      {"building_setback", number(sc.building_setback)},
      {"building_size", number(sc.building_size)},
      {"idm.v0", number(sc.idm.desired_speed)},
      {"idm.T", number(sc.idm.time_headway)},
      {"idm.a", number(sc.idm.max_accel)},
      {"idm.b", number(sc.idm.comfort_decel)},
      {"idm.s0", number(sc.idm.min_gap)},
      {"vehicle_length", number(sc.vehicle_length)},
      {"vehicle_width", number(sc.vehicle_width)},
      {"p_straight", number(sc.p_straight)},
      {"p_left", number(sc.p_left)},
      {"p_right", number(sc.p_right)},
      {"sensor.range", number(se.range)},
      {"sensor.cameras", integer(se.num_cameras)},
      {"sensor.fov", number(se.fov_per_camera_deg)},
      {"sensor.samples", integer(se.silhouette_samples)},
      {"sensor.threshold", number(se.visibility_threshold)},
  };

  std::istringstream in{std::string(input)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = text::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = text::trim(view.substr(0, eq));
    const auto value = text::trim(view.substr(eq + 1));
    try {
      if (key.starts_with("signal.")) {
        phases[text::parse_int(key.substr(7))] = parse_phase(value);
      } else if (key.starts_with("building.")) {
        buildings[text::parse_int(key.substr(9))] = parse_polygon(value);
      } else if (auto it = handlers.find(key); it != handlers.end()) {
        it->second(value);
      } else {
        throw ConfigError("unknown key '" + std::string(key) + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!phases.empty()) {
    sc.signal_plan.clear();
    for (auto& [idx, phase] : phases) sc.signal_plan.push_back(phase);
  }
  for (auto& [idx, poly] : buildings) sc.explicit_buildings.push_back(std::move(poly));
  sc.validate();
  se.validate();
  return cfg;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_config_text(const BenchConfig& config) {
  const auto& sc = config.scenario;
  const auto& se = config.sensors;
  auto f = [](double v) { return text::format_double(v); };
  std::ostringstream out;
  out << "arm_length = " << f(sc.arm_length) << '\n'
      << "lanes_per_arm = " << sc.lanes_per_arm << '\n'
      << "lane_width = " << f(sc.lane_width) << '\n';
  for (std::size_t i = 0; i < sc.signal_plan.size(); ++i) {
    const auto& phase = sc.signal_plan[i];
    out << "signal." << i << " = " << f(phase.duration) << ';';
    bool first = true;
    for (std::size_t a = 0; a < 4; ++a) {
      if (!phase.green[a]) continue;
      out << (first ? "" : ",") << kArmLetters[a];
      first = false;
    }
    out << '\n';
  }
  for (std::size_t a = 0; a < 4; ++a) out << "demand." << kArmLetters[a] << " = " << f(sc.demand[a]) << '\n';
  out << "entry_jitter_std = " << f(sc.entry_jitter_std) << '\n'
      << "penetration_rate = " << f(sc.penetration_rate) << '\n'
      << "radius = " << f(sc.radius) << '\n'
      << "center = " << point_text(sc.center) << '\n'
      << "t_start = " << f(sc.t_start) << '\n'
      << "t_end = " << f(sc.t_end) << '\n'
      << "dt = " << f(sc.dt) << '\n'
      << "seed = " << sc.seed << '\n'
      << "corner_buildings = " << (sc.corner_buildings ? 1 : 0) << '\n'
      << "building_setback = " << f(sc.building_setback) << '\n'
      << "building_size = " << f(sc.building_size) << '\n';
  for (std::size_t b = 0; b < sc.explicit_buildings.size(); ++b) {
    out << "building." << b << " = ";
    for (std::size_t i = 0; i < sc.explicit_buildings[b].size(); ++i) {
      out << (i ? ";" : "") << point_text(sc.explicit_buildings[b][i]);
    }
    out << '\n';
  }
  out << "idm.v0 = " << f(sc.idm.desired_speed) << '\n'
      << "idm.T = " << f(sc.idm.time_headway) << '\n'
      << "idm.a = " << f(sc.idm.max_accel) << '\n'
      << "idm.b = " << f(sc.idm.comfort_decel) << '\n'
      << "idm.s0 = " << f(sc.idm.min_gap) << '\n'
      << "vehicle_length = " << f(sc.vehicle_length) << '\n'
      << "vehicle_width = " << f(sc.vehicle_width) << '\n'
      << "p_straight = " << f(sc.p_straight) << '\n'
      << "p_left = " << f(sc.p_left) << '\n'
      << "p_right = " << f(sc.p_right) << '\n'
      << "sensor.range = " << f(se.range) << '\n'
      << "sensor.cameras = " << se.num_cameras << '\n'
      << "sensor.fov = " << f(se.fov_per_camera_deg) << '\n'
      << "sensor.samples = " << se.silhouette_samples << '\n'
      << "sensor.threshold = " << f(se.visibility_threshold) << '\n';
  return out.str();
}

}  // namespace fco
