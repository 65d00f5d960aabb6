#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fco/bev.hpp"
#include "fco/enhancement.hpp"

namespace fco {

inline constexpr double kDefaultTau = 0.5;
inline constexpr double kDefaultTheta = 0.5;

/// O_bin(i, j) = 1 iff O(i, j) >= tau. Throws ConfigError unless 0 < tau < 1.
template <typename Scalar>
BinaryGrid binarize(const BevGrid<Scalar>& output, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  return {output.spec, (output.data.template cast<double>() >= tau).template cast<std::uint8_t>()};
}

/// |O_bin and G| / |O_bin or G|; two empty masks give 1.
double iou(const BinaryGrid& output_bin, const BinaryGrid& target);

/// Fraction of the footprint pixels set in O_bin. Undefined for empty footprints.
std::optional<double> coverage(std::span<const Pixel> footprint, const BinaryGrid& output_bin);

struct VehicleTally {
  std::size_t count = 0;
  std::optional<double> ratio;   // count / potential, when potential > 0
  std::size_t skipped = 0;       // degenerate footprints excluded from the count
};

/// Vehicles of V_s,t outside V_d,t whose footprint coverage reaches theta.
VehicleTally recovered_vehicles(const BinaryGrid& output_bin, const SequenceSample& sample, double theta);

/// Vehicles of V_d,t whose footprint coverage falls below theta.
VehicleTally lost_vehicles(const BinaryGrid& output_bin, const SequenceSample& sample, double theta);

/// False-positive pixels (O_bin = 1, G = 0) over positive pixels of G; undefined for empty G.
std::optional<double> hallucinated_pixel_metric(const BinaryGrid& output_bin, const BinaryGrid& target);

struct MetricsReport {
  int run_id = 0;
  double t = 0.0;
  double iou = 0.0;
  std::size_t rv = 0;
  std::optional<double> rvm;
  std::size_t lv = 0;
  std::optional<double> lvm;
  std::optional<double> hpm;
  std::size_t potential = 0;
  std::size_t n_vt = 0;
  std::size_t n_vdt = 0;
  std::size_t n_vst = 0;
  std::size_t skipped_vehicles = 0;
};

MetricsReport evaluate_sample(const ProbGrid& output, const SequenceSample& sample, double tau = kDefaultTau,
                              double theta = kDefaultTheta);

struct MeanMetric {
  double mean = 0.0;
  std::size_t defined = 0;
  std::size_t undefined = 0;
};

struct DatasetReport {
  std::vector<MetricsReport> samples;
  MeanMetric iou;
  MeanMetric rvm;
  MeanMetric lvm;
  MeanMetric hpm;
  double mean_rv = 0.0;
  double mean_lv = 0.0;
};

/// Means over the samples on which each metric is defined.
DatasetReport summarize(std::vector<MetricsReport> reports);

DatasetReport evaluate_dataset(const Enhancer& enhancer, const DatasetSplit& split, double tau = kDefaultTau,
                               double theta = kDefaultTheta);
DatasetReport evaluate_samples(const Enhancer& enhancer, std::span<const SequenceSample> samples,
                               double tau = kDefaultTau, double theta = kDefaultTheta);

/// `run,t,iou,rv,rvm,lv,lvm,hpm,potential,n_vt,n_vdt,n_vst,skipped`, undefined values empty.
void write_metrics_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path);

}  // namespace fco
