#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fco/detection.hpp"
#include "fco/scenario.hpp"

namespace fco {

/// Square raster centered on the intersection. Row 0 is the top (+y up), column 0 the left.
struct GridSpec {
  int size_px = 512;
  Vec2 center = Vec2::Zero();
  double radius = 100.0;

  double meters_per_pixel() const { return 2.0 * radius / size_px; }
  void validate() const;

  /// World coordinates of the center of pixel (row, col).
  Vec2 pixel_center(int row, int col) const;
  /// Pixel containing a world point; may lie outside [0, size_px).
  std::pair<int, int> world_to_pixel(const Vec2& p) const;

  static GridSpec full(const Vec2& center = Vec2::Zero(), double radius = 100.0) { return {512, center, radius}; }
  static GridSpec desk(const Vec2& center = Vec2::Zero(), double radius = 100.0) { return {64, center, radius}; }

  bool operator==(const GridSpec&) const = default;
};

template <typename Scalar>
using GridData = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct BevGrid {
  GridSpec spec;
  GridData<Scalar> data;

  static BevGrid zeros(const GridSpec& spec) {
    return {spec, GridData<Scalar>::Zero(spec.size_px, spec.size_px)};
  }

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }

  bool operator==(const BevGrid& other) const {
    return spec == other.spec && data.rows() == other.data.rows() && data.cols() == other.data.cols() &&
           (data == other.data).all();
  }
};

using BinaryGrid = BevGrid<std::uint8_t>;  // values in {0, 1}
using ProbGrid = BevGrid<double>;          // values in [0, 1]

template <typename Scalar>
ProbGrid to_probability(const BevGrid<Scalar>& grid) {
  return {grid.spec, grid.data.template cast<double>()};
}

struct Pixel {
  int row = 0;
  int col = 0;

  bool operator==(const Pixel&) const = default;
};

/// Pixels whose centers lie inside the pose rectangle (boundary inclusive), row-major
/// order. Throws InputError for non-positive dimensions.
std::vector<Pixel> footprint_pixels(const VehiclePose& pose, const GridSpec& spec);

struct Footprint {
  BinaryGrid mask;
  std::size_t pixel_count = 0;

  /// No pixel center covered: the vehicle is off-grid or sub-pixel.
  bool degenerate() const { return pixel_count == 0; }
};

Footprint footprint_mask(const VehiclePose& pose, const GridSpec& spec);

BinaryGrid rasterize(std::span<const VehiclePose> poses, const GridSpec& spec);

/// Binary P5 graymap, maxval 255: 0 background, 255 occupied.
void write_pgm(const BinaryGrid& grid, const std::filesystem::path& path);
/// Raw 8-bit P5 payload (maxval <= 255). Throws IoError / ParseError.
GridData<std::uint8_t> read_pgm(const std::filesystem::path& path);
/// Reads a P5 file as a binary grid: values >= 128 become 1.
BinaryGrid read_binary_pgm(const std::filesystem::path& path, const GridSpec& spec);

struct SequenceSample {
  int run_id = 0;
  double t = 0.0;
  double s = 0.0;
  double dt = 1.0;
  GridSpec spec;
  std::vector<BinaryGrid> frames;  // S: rasters of V_d at t-s, ..., t (oldest first)
  BinaryGrid target;               // G: raster of V_s,t at time t
  std::vector<VehiclePose> detected;    // V_d,t poses at t
  std::vector<VehiclePose> window_set;  // V_s,t poses at t
  std::vector<std::vector<VehiclePose>> history;  // detected poses per frame of S
  std::size_t n_vt = 0;                           // |V_t|

  double frame_time(std::size_t k) const { return t - s + static_cast<double>(k) * dt; }
};

IdSet pose_ids(std::span<const VehiclePose> poses);

/// Builds the sample for time t with a window of s seconds. Throws WindowError when a
/// record is missing or the window starts before the run.
SequenceSample make_sample(const Run& run, const DetectionSeries& records, double t, double s,
                           const GridSpec& spec, int run_id = 0);

struct SplitCounts {
  std::size_t train = 8;
  std::size_t val = 1;
  std::size_t test = 1;

  std::size_t total() const { return train + val + test; }
};

struct DatasetInfo {
  GridSpec spec;
  double s = 5.0;
  double dt = 1.0;

  bool operator==(const DatasetInfo&) const = default;
};

void write_sample(const SequenceSample& sample, const std::filesystem::path& dir);
SequenceSample read_sample(const std::filesystem::path& dir, const DatasetInfo& info);
std::string sample_dir_name(int run_id, double t);

/// Writes `<out>/{train,val,test}/sample_<run>_<t>/` with one sample per timestep t where
/// t - s >= t_start. Runs are split in order, never by timestep. Existing split
/// directories are replaced. Throws ConfigError when there are too few runs.
void build_dataset(std::span<const Run> runs, std::span<const DetectionSeries> records, double s,
                   const GridSpec& spec, const std::filesystem::path& out, SplitCounts split = {});

/// Read access to one split of a dataset directory; samples load lazily in (run, t) order.
class DatasetSplit {
 public:
  static DatasetSplit open(const std::filesystem::path& root, const std::string& split);

  std::size_t size() const { return dirs_.size(); }
  bool empty() const { return dirs_.empty(); }
  const DatasetInfo& info() const { return info_; }
  const std::filesystem::path& sample_dir(std::size_t i) const { return dirs_.at(i); }
  SequenceSample load(std::size_t i) const { return read_sample(dirs_.at(i), info_); }

 private:
  DatasetInfo info_;
  std::vector<std::filesystem::path> dirs_;
};

DatasetInfo read_dataset_info(const std::filesystem::path& root);

}  // namespace fco
