#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fco/bev.hpp"

namespace fco {

/// Maps a detection window to an output grid O with values in [0, 1].
class Enhancer {
 public:
  virtual ~Enhancer() = default;
  virtual std::string name() const = 0;
  virtual ProbGrid enhance(const SequenceSample& sample) const = 0;
};

/// Record-form window: detected poses per frame, oldest first, plus their timestamps.
struct PoseHistory {
  double t_now = 0.0;
  std::vector<double> times;
  std::vector<std::vector<VehiclePose>> frames;

  static PoseHistory from(const SequenceSample& sample);
};

// Rule-based baselines.

ProbGrid enhance_identity(std::span<const BinaryGrid> frames);

/// Most recent observed pose of every id seen anywhere in the window.
std::vector<VehiclePose> persistence_poses(const PoseHistory& history);
ProbGrid enhance_persistence(const PoseHistory& history, const GridSpec& spec);

/// Poses propagated to t_now with the velocity between each id's last two sightings.
/// Heading follows the displacement above kHeadingSpeed, otherwise the last heading.
/// Ids seen once keep their last pose.
std::vector<VehiclePose> const_velocity_poses(const PoseHistory& history);
ProbGrid enhance_const_velocity(const PoseHistory& history, const GridSpec& spec);
inline constexpr double kHeadingSpeed = 0.5;

/// Upper bound: the raster of the ground-truth V_s,t poses, i.e. G.
ProbGrid enhance_oracle(std::span<const VehiclePose> window_set, const GridSpec& spec);

// Trainable 2D CNN whose kernel spans the full window depth.

struct ModelParams {
  int frames = 6;       // n = s/dt + 1
  int kernel_size = 5;  // K, odd
  std::vector<Eigen::MatrixXd> kernel;  // n matrices of K x K, indexed [k](du, dv)
  double bias = 0.0;
  double w_bce = 2.0;  // recorded for provenance in the params file

  static ModelParams zeros(int frames, int kernel_size);
  void validate() const;
  std::size_t parameter_count() const { return static_cast<std::size_t>(frames * kernel_size * kernel_size) + 1; }

  bool operator==(const ModelParams& other) const;
};

/// Pre-activation z = bias + zero-padded correlation of the frames with the kernel.
Eigen::ArrayXXd model_logits(std::span<const BinaryGrid> frames, const ModelParams& params);
/// O = sigmoid(z). Throws InputError on frame count or shape mismatch.
ProbGrid model_forward(std::span<const BinaryGrid> frames, const ModelParams& params);

/// Weighted BCE averaged over pixels, with predictions clipped to [eps, 1 - eps].
double wbce_loss(const ProbGrid& output, const BinaryGrid& target, double w_bce, double clip_eps);

struct TrainingPair {
  std::span<const BinaryGrid> frames;
  const BinaryGrid* target = nullptr;
};

struct LossGradient {
  double loss = 0.0;  // mean over the batch
  std::vector<Eigen::MatrixXd> kernel;
  double bias = 0.0;
};

/// Exact gradient of the batch-mean clipped weighted BCE with respect to kernel and bias.
LossGradient loss_gradient(const ModelParams& params, std::span<const TrainingPair> batch, double w_bce,
                           double clip_eps);

struct TrainConfig {
  double w_bce = 2.0;
  double learning_rate = 10.0;
  std::size_t epochs = 25;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  double clip_eps = 1e-7;
  std::size_t max_steps = 0;  // 0: no limit

  void validate() const;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;
  std::size_t steps = 0;
};

/// Kernel uniform in [-0.01, 0.01], bias at the logit of the positive-pixel rate.
ModelParams init_params(int frames, int kernel_size, double positive_rate, std::uint64_t seed);

/// Fraction of positive target pixels over the data set.
double positive_pixel_rate(std::size_t count, const std::function<SequenceSample(std::size_t)>& load);

/// Plain mini-batch gradient descent over shuffled samples, deterministic given the seed.
TrainResult train(std::size_t count, const std::function<SequenceSample(std::size_t)>& load,
                  const TrainConfig& config, ModelParams init);
TrainResult train(std::span<const SequenceSample> samples, const TrainConfig& config, ModelParams init);

void write_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams read_params(const std::filesystem::path& path);
/// `epoch,mean_loss`
void write_loss_history(std::span<const double> epoch_loss, const std::filesystem::path& path);

enum class EnhancerKind { Identity, Persistence, ConstVelocity, Oracle, Model };

/// Factory for the named enhancers. `params` is required for EnhancerKind::Model.
std::unique_ptr<Enhancer> make_enhancer(EnhancerKind kind, const ModelParams* params = nullptr);

}  // namespace fco
