#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fco/scenario.hpp"
#include "fco/text.hpp"

namespace fco {

namespace {

constexpr const char* kHeader = "t,id,x,y,heading,length,width,speed,is_fco";

struct Row {
  std::size_t line;
  double t;
  VehiclePose pose;
  bool fco;
};

std::vector<Row> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  if (text::trim(line) != kHeader) throw ParseError(1, "unexpected header '" + line + "'");

  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != 9) {
      throw ParseError(line_no, "expected 9 fields, found " + std::to_string(fields.size()));
    }
    Row row{line_no, 0.0, {}, false};
    try {
      row.t = text::parse_double(fields[0]);
      row.pose.id = VehicleId{text::parse_uint(fields[1])};
      row.pose.position = Vec2(text::parse_double(fields[2]), text::parse_double(fields[3]));
      row.pose.heading = text::parse_double(fields[4]);
      row.pose.length = text::parse_double(fields[5]);
      row.pose.width = text::parse_double(fields[6]);
      row.pose.speed = text::parse_double(fields[7]);
      const auto flag = text::parse_uint(fields[8]);
      if (flag > 1) throw std::invalid_argument("is_fco must be 0 or 1");
      row.fco = flag == 1;
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    if (!std::isfinite(row.t) || !row.pose.position.allFinite()) {
      throw ParseError(line_no, "non-finite value");
    }
    if (!(row.pose.length > 0.0 && row.pose.width > 0.0)) {
      throw ParseError(line_no, "vehicle dimensions must be positive");
    }
    if (!(row.pose.speed >= 0.0)) throw ParseError(line_no, "speed must be non-negative");
    if (!rows.empty()) {
      const Row& prev = rows.back();
      if (row.t < prev.t) throw ParseError(line_no, "timestamps are not monotone");
      if (row.t == prev.t) {
        if (row.pose.id == prev.pose.id) throw ParseError(line_no, "duplicate (t, id) row");
        if (row.pose.id < prev.pose.id) throw ParseError(line_no, "rows not sorted by id within a timestep");
      }
    }
    rows.push_back(row);
  }
  return rows;
}

Run place_rows(const std::vector<Row>& rows, const ScenarioConfig& config) {
  Run run;
  run.config = config;
  const std::size_t n = config.frame_count();
  run.frames.resize(n);
  for (std::size_t k = 0; k < n; ++k) run.frames[k].t = config.frame_time(k);
  for (const auto& row : rows) {
    const double k_real = (row.t - config.t_start) / config.dt;
    const long long k = std::llround(k_real);
    if (k < 0 || static_cast<std::size_t>(k) >= n ||
        std::abs(config.frame_time(static_cast<std::size_t>(k)) - row.t) > 1e-9 * std::max(1.0, std::abs(row.t))) {
      throw ParseError(row.line, "timestamp " + text::format_double(row.t) + " is not on the run's time grid");
    }
    auto& frame = run.frames[static_cast<std::size_t>(k)];
    frame.vehicles.push_back(row.pose);
    if (row.fco) frame.fco_ids.insert(row.pose.id);
  }
  return run;
}

}  // namespace

void export_run(const Run& run, const std::filesystem::path& path) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& frame : run.frames) {
    const std::string t = text::format_double(frame.t);
    for (const auto& v : frame.vehicles) {
      out << t << ',' << to_underlying(v.id) << ',' << text::format_double(v.position.x()) << ','
          << text::format_double(v.position.y()) << ',' << text::format_double(v.heading) << ','
          << text::format_double(v.length) << ',' << text::format_double(v.width) << ','
          << text::format_double(v.speed) << ',' << (frame.fco_ids.contains(v.id) ? 1 : 0) << '\n';
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write trajectory file " + path.string());
  file << out.str();
  if (!file) throw IoError("write failed for " + path.string());
}

Run import_run(const std::filesystem::path& path, const ScenarioConfig& config) {
  config.validate();
  return place_rows(read_rows(path), config);
}

Run import_run(const std::filesystem::path& path) {
  const auto rows = read_rows(path);
  ScenarioConfig config;
  if (rows.empty()) {
    Run run;
    run.config = config;
    return run;
  }
  config.t_start = rows.front().t;
  config.t_end = rows.back().t;
  double dt = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double d = rows[i].t - rows[i - 1].t;
    if (d > 0.0 && (dt == 0.0 || d < dt)) dt = d;
  }
  config.dt = dt > 0.0 ? dt : 1.0;
  if (config.t_end <= config.t_start) config.t_end = config.t_start + config.dt;
  Run run = place_rows(rows, config);
  if (rows.front().t == rows.back().t) run.frames.resize(1);
  return run;
}

}  // namespace fco
