#include "fco/metrics.hpp"

#include <fstream>
#include <sstream>

#include "fco/parallel.hpp"
#include "fco/text.hpp"

namespace fco {

namespace {

void check_shapes(const BinaryGrid& a, const BinaryGrid& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InputError("grid shape mismatch");
}

void check_theta(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
}

}  // namespace

double iou(const BinaryGrid& output_bin, const BinaryGrid& target) {
  check_shapes(output_bin, target);
  const auto o = output_bin.data != 0;
  const auto g = target.data != 0;
  const auto inter = (o && g).count();
  const auto uni = (o || g).count();
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<double> coverage(std::span<const Pixel> footprint, const BinaryGrid& output_bin) {
  if (footprint.empty()) return std::nullopt;
  std::size_t hit = 0;
  for (const auto& px : footprint) hit += output_bin.data(px.row, px.col) != 0 ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(footprint.size());
}

VehicleTally recovered_vehicles(const BinaryGrid& output_bin, const SequenceSample& sample, double theta) {
  check_theta(theta);
  const IdSet detected = pose_ids(sample.detected);
  VehicleTally tally;
  std::size_t potential = 0;
  for (const auto& pose : sample.window_set) {
    if (detected.contains(pose.id)) continue;
    ++potential;
    const auto pixels = footprint_pixels(pose, output_bin.spec);
    const auto cov = coverage(pixels, output_bin);
    if (!cov) {
      ++tally.skipped;
    } else if (*cov >= theta) {
      ++tally.count;
    }
  }
  if (potential > 0) tally.ratio = static_cast<double>(tally.count) / static_cast<double>(potential);
  return tally;
}

VehicleTally lost_vehicles(const BinaryGrid& output_bin, const SequenceSample& sample, double theta) {
  check_theta(theta);
  const IdSet detected = pose_ids(sample.detected);
  std::size_t potential = 0;
  for (const auto& pose : sample.window_set) potential += detected.contains(pose.id) ? 0 : 1;
  VehicleTally tally;
  for (const auto& pose : sample.detected) {
    const auto pixels = footprint_pixels(pose, output_bin.spec);
    const auto cov = coverage(pixels, output_bin);
    if (!cov) {
      ++tally.skipped;
    } else if (*cov < theta) {
      ++tally.count;
    }
  }
  if (potential > 0) tally.ratio = static_cast<double>(tally.count) / static_cast<double>(potential);
  return tally;
}

std::optional<double> hallucinated_pixel_metric(const BinaryGrid& output_bin, const BinaryGrid& target) {
  check_shapes(output_bin, target);
  const auto positives = (target.data != 0).count();
  if (positives == 0) return std::nullopt;
  const auto false_pos = ((output_bin.data != 0) && (target.data == 0)).count();
  return static_cast<double>(false_pos) / static_cast<double>(positives);
}

MetricsReport evaluate_sample(const ProbGrid& output, const SequenceSample& sample, double tau, double theta) {
  const BinaryGrid o_bin = binarize(output, tau);
  MetricsReport r;
  r.run_id = sample.run_id;
  r.t = sample.t;
  r.iou = iou(o_bin, sample.target);
  const auto rec = recovered_vehicles(o_bin, sample, theta);
  const auto lost = lost_vehicles(o_bin, sample, theta);
  r.rv = rec.count;
  r.rvm = rec.ratio;
  r.lv = lost.count;
  r.lvm = lost.ratio;
  r.hpm = hallucinated_pixel_metric(o_bin, sample.target);
  r.n_vt = sample.n_vt;
  r.n_vdt = sample.detected.size();
  r.n_vst = sample.window_set.size();
  r.potential = r.n_vst - r.n_vdt;
  r.skipped_vehicles = rec.skipped + lost.skipped;
  return r;
}

namespace {

void accumulate(MeanMetric& m, std::optional<double> v) {
  if (v) {
    m.mean += *v;
    ++m.defined;
  } else {
    ++m.undefined;
  }
}

void finish(MeanMetric& m) {
  if (m.defined > 0) m.mean /= static_cast<double>(m.defined);
}

}  // namespace

DatasetReport summarize(std::vector<MetricsReport> reports) {
  DatasetReport out;
  out.samples = std::move(reports);
  for (const auto& r : out.samples) {
    accumulate(out.iou, r.iou);
    accumulate(out.rvm, r.rvm);
    accumulate(out.lvm, r.lvm);
    accumulate(out.hpm, r.hpm);
    out.mean_rv += static_cast<double>(r.rv);
    out.mean_lv += static_cast<double>(r.lv);
  }
  finish(out.iou);
  finish(out.rvm);
  finish(out.lvm);
  finish(out.hpm);
  if (!out.samples.empty()) {
    out.mean_rv /= static_cast<double>(out.samples.size());
    out.mean_lv /= static_cast<double>(out.samples.size());
  }
  return out;
}

DatasetReport evaluate_dataset(const Enhancer& enhancer, const DatasetSplit& split, double tau, double theta) {
  std::vector<MetricsReport> reports(split.size());
  parallel_for(split.size(), [&](std::size_t i) {
    const auto sample = split.load(i);
    reports[i] = evaluate_sample(enhancer.enhance(sample), sample, tau, theta);
  });
  return summarize(std::move(reports));
}

DatasetReport evaluate_samples(const Enhancer& enhancer, std::span<const SequenceSample> samples, double tau,
                               double theta) {
  std::vector<MetricsReport> reports(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    reports[i] = evaluate_sample(enhancer.enhance(samples[i]), samples[i], tau, theta);
  });
  return summarize(std::move(reports));
}

void write_metrics_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path) {
  auto opt = [](const std::optional<double>& v) { return v ? text::format_double(*v) : std::string(); };
  std::ostringstream out;
  out << "run,t,iou,rv,rvm,lv,lvm,hpm,potential,n_vt,n_vdt,n_vst,skipped\n";
  for (const auto& r : reports) {
    out << r.run_id << ',' << text::format_double(r.t) << ',' << text::format_double(r.iou) << ',' << r.rv << ','
        << opt(r.rvm) << ',' << r.lv << ',' << opt(r.lvm) << ',' << opt(r.hpm) << ',' << r.potential << ','
        << r.n_vt << ',' << r.n_vdt << ',' << r.n_vst << ',' << r.skipped_vehicles << '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  file << out.str();
  if (!file) throw IoError("write failed for " + path.string());
}

}  // namespace fco
