#include "fco/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fco/parallel.hpp"
#include "fco/text.hpp"

namespace fco {

IdSet radius_filter(const Frame& frame, const Vec2& center, double r) {
  IdSet out;
  for (const auto& v : frame.vehicles) {
    if ((v.position - center).norm() <= r) out.insert(out.end(), v.id);
  }
  return out;
}

std::size_t window_steps(double s, double dt) {
  if (!(dt > 0.0)) throw WindowError("dt must be positive");
  if (!(s >= 0.0)) throw WindowError("window length must be non-negative");
  const double k = s / dt;
  const double k_round = std::round(k);
  if (std::abs(k - k_round) > 1e-9 * std::max(1.0, k)) {
    throw WindowError("window length " + text::format_double(s) + " is not a multiple of dt");
  }
  return static_cast<std::size_t>(k_round) + 1;
}

IdSet window_union(const DetectionSeries& records, const IdSet& v_t, double t, double s, double dt) {
  const std::size_t steps = window_steps(s, dt);
  IdSet seen;
  for (std::size_t k = 0; k < steps; ++k) {
    const double tk = t - static_cast<double>(k) * dt;
    const auto* rec = records.at(tk);
    if (rec == nullptr) throw WindowError("missing detection record at t=" + text::format_double(tk));
    seen.insert(rec->detected_ids.begin(), rec->detected_ids.end());
  }
  IdSet out;
  std::set_intersection(seen.begin(), seen.end(), v_t.begin(), v_t.end(), std::inserter(out, out.end()));
  return out;
}

void WindowedSets::check() const {
  if (!std::includes(v_s_t.begin(), v_s_t.end(), v_d_t.begin(), v_d_t.end())) {
    throw std::logic_error("V_d,t is not a subset of V_s,t");
  }
  if (!std::includes(v_t.begin(), v_t.end(), v_s_t.begin(), v_s_t.end())) {
    throw std::logic_error("V_s,t is not a subset of V_t");
  }
}

WindowedSets windowed_sets(const Run& run, const DetectionSeries& records, std::size_t frame_index, double s) {
  const auto& frame = run.frames.at(frame_index);
  WindowedSets sets;
  sets.t = frame.t;
  sets.window_s = s;
  sets.v_t = radius_filter(frame, run.config.center, run.config.radius);
  const auto* now = records.at(frame.t);
  if (now == nullptr) throw WindowError("missing detection record at t=" + text::format_double(frame.t));
  std::set_intersection(now->detected_ids.begin(), now->detected_ids.end(), sets.v_t.begin(), sets.v_t.end(),
                        std::inserter(sets.v_d_t, sets.v_d_t.end()));
  sets.v_s_t = window_union(records, sets.v_t, frame.t, s, run.config.dt);
  sets.check();
  return sets;
}

DetectabilityDistribution detectability_distribution(const Run& run, const DetectionSeries& records,
                                                     const Vec2& center, double r) {
  DetectabilityDistribution dist;
  double sum = 0.0;
  for (const auto& frame : run.frames) {
    const IdSet v_t = radius_filter(frame, center, r);
    if (v_t.empty()) continue;
    const auto* rec = records.at(frame.t);
    if (rec == nullptr) throw WindowError("missing detection record at t=" + text::format_double(frame.t));
    std::size_t detected = 0;
    for (VehicleId id : rec->detected_ids) detected += v_t.contains(id) ? 1 : 0;
    const double ratio = static_cast<double>(detected) / static_cast<double>(v_t.size());
    dist.times.push_back(frame.t);
    dist.n_vt.push_back(v_t.size());
    dist.n_vdt.push_back(detected);
    dist.ratios.push_back(ratio);
    sum += ratio;
  }
  if (!dist.ratios.empty()) dist.mean = sum / static_cast<double>(dist.ratios.size());
  return dist;
}

PotentialGrid potential_grid(const Run& run, std::span<const DetectionSeries> records_per_penetration,
                             std::span<const double> penetrations, std::span<const double> window_lengths) {
  if (records_per_penetration.size() != penetrations.size()) {
    throw std::invalid_argument("one detection series per penetration is required");
  }
  const double dt = run.config.dt;
  std::size_t max_steps = 1;
  for (double s : window_lengths) max_steps = std::max(max_steps, window_steps(s, dt));
  if (max_steps > run.frames.size()) throw WindowError("window longer than the run");

  PotentialGrid grid;
  grid.penetrations.assign(penetrations.begin(), penetrations.end());
  grid.window_lengths.assign(window_lengths.begin(), window_lengths.end());
  const auto n_p = static_cast<Eigen::Index>(penetrations.size());
  const auto n_s = static_cast<Eigen::Index>(window_lengths.size());
  grid.mean_potential = Eigen::MatrixXd::Zero(n_p, n_s);
  grid.mean_absolute = Eigen::MatrixXd::Zero(n_p, n_s);
  grid.valid_timesteps.assign(penetrations.size(), 0);

  parallel_for(penetrations.size(), [&](std::size_t p) {
    const auto& records = records_per_penetration[p];
    Eigen::VectorXd rel = Eigen::VectorXd::Zero(n_s);
    Eigen::VectorXd absolute = Eigen::VectorXd::Zero(n_s);
    std::size_t valid = 0;
    for (std::size_t k = max_steps - 1; k < run.frames.size(); ++k) {
      const IdSet v_t = radius_filter(run.frames[k], run.config.center, run.config.radius);
      if (v_t.empty()) continue;
      ++valid;
      for (Eigen::Index j = 0; j < n_s; ++j) {
        const auto sets = windowed_sets(run, records, k, window_lengths[static_cast<std::size_t>(j)]);
        const double diff = static_cast<double>(sets.potential());
        rel(j) += diff / static_cast<double>(v_t.size());
        absolute(j) += diff;
      }
    }
    if (valid > 0) {
      grid.mean_potential.row(static_cast<Eigen::Index>(p)) = rel.transpose() / static_cast<double>(valid);
      grid.mean_absolute.row(static_cast<Eigen::Index>(p)) = absolute.transpose() / static_cast<double>(valid);
    }
    grid.valid_timesteps[p] = valid;
  });
  return grid;
}

std::vector<DetectionSeries> detect_penetrations(const Run& run, std::span<const double> penetrations,
                                                 const SensorConfig& sensors, std::uint64_t base_seed) {
  std::vector<DetectionSeries> out;
  out.reserve(penetrations.size());
  for (std::size_t i = 0; i < penetrations.size(); ++i) {
    const Run assigned = assign_fcos(run, penetrations[i], base_seed + i);
    out.push_back(detect_run(assigned, sensors));
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  file << content;
  if (!file) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_potential_csv(const PotentialGrid& grid, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "penetration,s,mean_potential,mean_absolute\n";
  for (std::size_t p = 0; p < grid.penetrations.size(); ++p) {
    for (std::size_t j = 0; j < grid.window_lengths.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(p);
      const auto c = static_cast<Eigen::Index>(j);
      out << text::format_double(grid.penetrations[p]) << ',' << text::format_double(grid.window_lengths[j]) << ','
          << text::format_double(grid.mean_potential(r, c)) << ',' << text::format_double(grid.mean_absolute(r, c))
          << '\n';
    }
  }
  write_file(path, out.str());
}

void write_distribution_csv(std::span<const double> penetrations,
                            std::span<const DetectabilityDistribution> distributions,
                            const std::filesystem::path& path) {
  std::ostringstream out;
  out << "penetration,t,n_vt,n_vdt,ratio\n";
  for (std::size_t p = 0; p < penetrations.size(); ++p) {
    const auto& d = distributions[p];
    for (std::size_t i = 0; i < d.ratios.size(); ++i) {
      out << text::format_double(penetrations[p]) << ',' << text::format_double(d.times[i]) << ',' << d.n_vt[i]
          << ',' << d.n_vdt[i] << ',' << text::format_double(d.ratios[i]) << '\n';
    }
  }
  write_file(path, out.str());
}

}  // namespace fco
