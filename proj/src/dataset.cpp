#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "fco/bev.hpp"
#include "fco/parallel.hpp"
#include "fco/temporal.hpp"
#include "fco/text.hpp"

namespace fco {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

void append_pose(std::ostringstream& out, const VehiclePose& p) {
  out << to_underlying(p.id) << ',' << text::format_double(p.position.x()) << ','
      << text::format_double(p.position.y()) << ',' << text::format_double(p.heading) << ','
      << text::format_double(p.length) << ',' << text::format_double(p.width);
}

VehiclePose parse_pose(std::span<const std::string_view> f, std::size_t line) {
  try {
    VehiclePose p;
    p.id = VehicleId{text::parse_uint(f[0])};
    p.position = Vec2(text::parse_double(f[1]), text::parse_double(f[2]));
    p.heading = text::parse_double(f[3]);
    p.length = text::parse_double(f[4]);
    p.width = text::parse_double(f[5]);
    if (f.size() > 6) p.speed = text::parse_double(f[6]);
    return p;
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
}

template <typename RowFn>
void read_csv(const fs::path& path, const std::string& header, std::size_t fields, RowFn&& on_row) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != header) {
    throw ParseError(1, "expected header '" + header + "' in " + path.string());
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line), ',');
    if (f.size() != fields) throw ParseError(line_no, "wrong field count in " + path.string());
    on_row(std::span<const std::string_view>(f), line_no);
  }
}

std::string frame_name(std::size_t k) {
  std::string digits = std::to_string(k);
  return "S_" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits + ".pgm";
}

}  // namespace

std::string sample_dir_name(int run_id, double t) {
  return "sample_" + std::to_string(run_id) + "_" + text::format_double(t);
}

void write_sample(const SequenceSample& sample, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < sample.frames.size(); ++k) write_pgm(sample.frames[k], dir / frame_name(k));
  write_pgm(sample.target, dir / "G.pgm");

  std::ostringstream meta;
  meta << "role,id,x,y,heading,length,width\n";
  for (const auto& p : sample.detected) {
    meta << "d,";
    append_pose(meta, p);
    meta << '\n';
  }
  for (const auto& p : sample.window_set) {
    meta << "s,";
    append_pose(meta, p);
    meta << '\n';
  }
  write_text(dir / "meta.csv", meta.str());

  std::ostringstream hist;
  hist << "k,id,x,y,heading,length,width,speed\n";
  for (std::size_t k = 0; k < sample.history.size(); ++k) {
    for (const auto& p : sample.history[k]) {
      hist << k << ',';
      append_pose(hist, p);
      hist << ',' << text::format_double(p.speed) << '\n';
    }
  }
  write_text(dir / "history.csv", hist.str());
  write_text(dir / "sample.txt", "n_vt = " + std::to_string(sample.n_vt) + "\n");
}

SequenceSample read_sample(const fs::path& dir, const DatasetInfo& info) {
  SequenceSample sample;
  const std::string name = dir.filename().string();
  const auto parts = text::split(name, '_');
  if (parts.size() != 3 || parts[0] != "sample") throw ParseError(0, "bad sample directory name " + name);
  try {
    sample.run_id = static_cast<int>(text::parse_int(parts[1]));
    sample.t = text::parse_double(parts[2]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, "bad sample directory name " + name + ": " + e.what());
  }
  sample.s = info.s;
  sample.dt = info.dt;
  sample.spec = info.spec;
  const std::size_t steps = window_steps(info.s, info.dt);
  for (std::size_t k = 0; k < steps; ++k) sample.frames.push_back(read_binary_pgm(dir / frame_name(k), info.spec));
  sample.target = read_binary_pgm(dir / "G.pgm", info.spec);

  read_csv(dir / "meta.csv", "role,id,x,y,heading,length,width", 7,
           [&](std::span<const std::string_view> f, std::size_t line) {
             const auto pose = parse_pose(f.subspan(1), line);
             if (f[0] == "d") {
               sample.detected.push_back(pose);
             } else if (f[0] == "s") {
               sample.window_set.push_back(pose);
             } else {
               throw ParseError(line, "unknown role '" + std::string(f[0]) + "'");
             }
           });
  sample.history.assign(steps, {});
  read_csv(dir / "history.csv", "k,id,x,y,heading,length,width,speed", 8,
           [&](std::span<const std::string_view> f, std::size_t line) {
             std::size_t k = 0;
             try {
               k = static_cast<std::size_t>(text::parse_uint(f[0]));
             } catch (const std::invalid_argument& e) {
               throw ParseError(line, e.what());
             }
             if (k >= steps) throw ParseError(line, "history frame index out of range");
             sample.history[k].push_back(parse_pose(f.subspan(1), line));
           });
  {
    std::ifstream in(dir / "sample.txt");
    if (!in) throw IoError("missing sample.txt in " + dir.string());
    std::string line;
    std::getline(in, line);
    const auto eq = line.find('=');
    if (eq == std::string::npos || text::trim(std::string_view(line).substr(0, eq)) != "n_vt") {
      throw ParseError(1, "expected 'n_vt = <count>' in " + (dir / "sample.txt").string());
    }
    try {
      sample.n_vt = static_cast<std::size_t>(text::parse_uint(std::string_view(line).substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(1, e.what());
    }
  }
  return sample;
}

DatasetInfo read_dataset_info(const fs::path& root) {
  std::ifstream in(root / "dataset.txt");
  if (!in) throw IoError("missing dataset.txt in " + root.string());
  std::map<std::string, double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    try {
      values[std::string(text::trim(trimmed.substr(0, eq)))] = text::parse_double(trimmed.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  auto get = [&](const char* key) {
    auto it = values.find(key);
    if (it == values.end()) throw ParseError(0, std::string("dataset.txt lacks key ") + key);
    return it->second;
  };
  DatasetInfo info;
  info.spec.size_px = static_cast<int>(get("size_px"));
  info.spec.center = Vec2(get("center_x"), get("center_y"));
  info.spec.radius = get("radius");
  info.s = get("s");
  info.dt = get("dt");
  info.spec.validate();
  return info;
}

void build_dataset(std::span<const Run> runs, std::span<const DetectionSeries> records, double s,
                   const GridSpec& spec, const fs::path& out, SplitCounts split) {
  spec.validate();
  if (runs.size() != records.size()) throw ConfigError("one detection series per run is required");
  if (runs.size() < split.total()) {
    throw ConfigError("split needs " + std::to_string(split.total()) + " runs, got " + std::to_string(runs.size()));
  }
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < split.total(); ++i) {
    if (!seeds.insert(runs[i].config.seed).second) throw ConfigError("runs must use distinct seeds");
    if (runs[i].config.dt != runs[0].config.dt) throw ConfigError("runs must share dt");
  }
  const double dt = runs.empty() ? 1.0 : runs[0].config.dt;
  const std::size_t steps = window_steps(s, dt);

  fs::create_directories(out);
  std::ostringstream info;
  info << "size_px = " << spec.size_px << "\ncenter_x = " << text::format_double(spec.center.x())
       << "\ncenter_y = " << text::format_double(spec.center.y()) << "\nradius = " << text::format_double(spec.radius)
       << "\ns = " << text::format_double(s) << "\ndt = " << text::format_double(dt) << '\n';
  write_text(out / "dataset.txt", info.str());

  const std::array<std::pair<const char*, std::size_t>, 3> splits = {
      std::pair{"train", split.train}, std::pair{"val", split.val}, std::pair{"test", split.test}};
  std::size_t run_index = 0;
  for (const auto& [name, count] : splits) {
    const fs::path dir = out / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (std::size_t r = 0; r < count; ++r, ++run_index) {
      const Run& run = runs[run_index];
      const DetectionSeries& rec = records[run_index];
      if (run.frames.size() < steps) continue;
      const std::size_t first = steps - 1;
      parallel_for(run.frames.size() - first, [&](std::size_t i) {
        const double t = run.frames[first + i].t;
        const auto sample = make_sample(run, rec, t, s, spec, static_cast<int>(run_index));
        write_sample(sample, dir / sample_dir_name(sample.run_id, sample.t));
      });
    }
  }
}

DatasetSplit DatasetSplit::open(const fs::path& root, const std::string& split) {
  DatasetSplit ds;
  ds.info_ = read_dataset_info(root);
  const fs::path dir = root / split;
  if (!fs::is_directory(dir)) throw IoError("missing split directory " + dir.string());
  std::vector<std::tuple<int, double, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    const auto parts = text::split(name, '_');
    if (parts.size() != 3 || parts[0] != "sample") continue;
    try {
      found.emplace_back(static_cast<int>(text::parse_int(parts[1])), text::parse_double(parts[2]), entry.path());
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  for (auto& f : found) ds.dirs_.push_back(std::get<2>(f));
  return ds;
}

}  // namespace fco
