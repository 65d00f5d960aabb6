#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "fco/enhancement.hpp"
#include "fco/text.hpp"

namespace fco {

namespace {

// Overlap of the output grid with the input shifted by (du - half, dv - half):
// output rows [r0, r1), input rows [r0 + off, r1 + off).
struct Overlap {
  Eigen::Index out_row, out_col, in_row, in_col, rows, cols;
};

Overlap overlap(Eigen::Index height, Eigen::Index width, int du, int dv, int half) {
  const Eigen::Index off_r = du - half;
  const Eigen::Index off_c = dv - half;
  const Eigen::Index r0 = std::max<Eigen::Index>(0, -off_r);
  const Eigen::Index r1 = std::min<Eigen::Index>(height, height - off_r);
  const Eigen::Index c0 = std::max<Eigen::Index>(0, -off_c);
  const Eigen::Index c1 = std::min<Eigen::Index>(width, width - off_c);
  return {r0, c0, r0 + off_r, c0 + off_c, std::max<Eigen::Index>(0, r1 - r0), std::max<Eigen::Index>(0, c1 - c0)};
}

void check_frames(std::span<const BinaryGrid> frames, const ModelParams& params) {
  if (frames.size() != static_cast<std::size_t>(params.frames)) {
    throw InputError("model expects " + std::to_string(params.frames) + " frames, got " +
                     std::to_string(frames.size()));
  }
  for (const auto& f : frames) {
    if (f.rows() != frames.front().rows() || f.cols() != frames.front().cols()) {
      throw InputError("frames differ in shape");
    }
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

ModelParams ModelParams::zeros(int frames, int kernel_size) {
  ModelParams p;
  p.frames = frames;
  p.kernel_size = kernel_size;
  p.kernel.assign(static_cast<std::size_t>(std::max(frames, 0)), Eigen::MatrixXd::Zero(kernel_size, kernel_size));
  p.bias = 0.0;
  return p;
}

void ModelParams::validate() const {
  if (frames < 1) throw ConfigError("model needs at least one frame");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigError("kernel size must be odd and positive");
  if (kernel.size() != static_cast<std::size_t>(frames)) throw InputError("kernel depth does not match frames");
  for (const auto& k : kernel) {
    if (k.rows() != kernel_size || k.cols() != kernel_size) throw InputError("kernel slice has the wrong shape");
  }
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (frames != other.frames || kernel_size != other.kernel_size || bias != other.bias || w_bce != other.w_bce ||
      kernel.size() != other.kernel.size()) {
    return false;
  }
  for (std::size_t k = 0; k < kernel.size(); ++k) {
    if (kernel[k] != other.kernel[k]) return false;
  }
  return true;
}

Eigen::ArrayXXd model_logits(std::span<const BinaryGrid> frames, const ModelParams& params) {
  params.validate();
  check_frames(frames, params);
  const Eigen::Index h = frames.front().rows();
  const Eigen::Index w = frames.front().cols();
  const int half = params.kernel_size / 2;
  Eigen::ArrayXXd z = Eigen::ArrayXXd::Constant(h, w, params.bias);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const Eigen::ArrayXXd s = frames[k].data.cast<double>();
    for (int du = 0; du < params.kernel_size; ++du) {
      for (int dv = 0; dv < params.kernel_size; ++dv) {
        const double weight = params.kernel[k](du, dv);
        if (weight == 0.0) continue;
        const auto o = overlap(h, w, du, dv, half);
        z.block(o.out_row, o.out_col, o.rows, o.cols) += weight * s.block(o.in_row, o.in_col, o.rows, o.cols);
      }
    }
  }
  return z;
}

ProbGrid model_forward(std::span<const BinaryGrid> frames, const ModelParams& params) {
  const Eigen::ArrayXXd z = model_logits(frames, params);
  ProbGrid out{frames.front().spec, GridData<double>(z.rows(), z.cols())};
  out.data = z.unaryExpr([](double v) { return sigmoid(v); });
  return out;
}

double wbce_loss(const ProbGrid& output, const BinaryGrid& target, double w_bce, double clip_eps) {
  if (output.rows() != target.rows() || output.cols() != target.cols()) throw InputError("loss shape mismatch");
  const Eigen::ArrayXXd o = output.data.cwiseMax(clip_eps).cwiseMin(1.0 - clip_eps);
  const Eigen::ArrayXXd g = target.data.cast<double>();
  const Eigen::ArrayXXd per_pixel = w_bce * g * o.log() + (1.0 - g) * (1.0 - o).log();
  return -per_pixel.mean();
}

LossGradient loss_gradient(const ModelParams& params, std::span<const TrainingPair> batch, double w_bce,
                           double clip_eps) {
  params.validate();
  LossGradient grad;
  grad.kernel.assign(params.kernel.size(), Eigen::MatrixXd::Zero(params.kernel_size, params.kernel_size));
  if (batch.empty()) return grad;
  const int half = params.kernel_size / 2;

  for (const auto& pair : batch) {
    const Eigen::ArrayXXd z = model_logits(pair.frames, params);
    const Eigen::ArrayXXd sig = z.unaryExpr([](double v) { return sigmoid(v); });
    const Eigen::ArrayXXd g = pair.target->data.cast<double>();
    if (g.rows() != z.rows() || g.cols() != z.cols()) throw InputError("target shape mismatch");
    const double n_pixels = static_cast<double>(z.size());

    const Eigen::ArrayXXd clipped = sig.cwiseMax(clip_eps).cwiseMin(1.0 - clip_eps);
    grad.loss += -(w_bce * g * clipped.log() + (1.0 - g) * (1.0 - clipped).log()).mean();

    // dL/dz per pixel; the clip has zero slope outside [eps, 1 - eps].
    const Eigen::ArrayXXd active = ((sig >= clip_eps) && (sig <= 1.0 - clip_eps)).cast<double>();
    const Eigen::ArrayXXd dz = active * (-w_bce * g * (1.0 - sig) + (1.0 - g) * sig) / n_pixels;

    grad.bias += dz.sum();
    const Eigen::Index h = z.rows();
    const Eigen::Index w = z.cols();
    for (std::size_t k = 0; k < pair.frames.size(); ++k) {
      const Eigen::ArrayXXd s = pair.frames[k].data.cast<double>();
      for (int du = 0; du < params.kernel_size; ++du) {
        for (int dv = 0; dv < params.kernel_size; ++dv) {
          const auto o = overlap(h, w, du, dv, half);
          grad.kernel[k](du, dv) += (dz.block(o.out_row, o.out_col, o.rows, o.cols) *
                                     s.block(o.in_row, o.in_col, o.rows, o.cols))
                                        .sum();
        }
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  grad.loss *= inv;
  grad.bias *= inv;
  for (auto& k : grad.kernel) k *= inv;
  return grad;
}

void TrainConfig::validate() const {
  if (!(w_bce > 0.0)) throw ConfigError("w_bce must be positive");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(clip_eps > 0.0 && clip_eps < 0.5)) throw ConfigError("clip_eps must be in (0, 0.5)");
}

ModelParams init_params(int frames, int kernel_size, double positive_rate, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(frames, kernel_size);
  p.validate();
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::uniform_real_distribution<double> unit(-0.01, 0.01);
  for (auto& slice : p.kernel) {
    for (Eigen::Index i = 0; i < slice.rows(); ++i) {
      for (Eigen::Index j = 0; j < slice.cols(); ++j) slice(i, j) = unit(rng);
    }
  }
  const double q = std::clamp(positive_rate, 1e-4, 1.0 - 1e-4);
  p.bias = std::log(q / (1.0 - q));
  return p;
}

double positive_pixel_rate(std::size_t count, const std::function<SequenceSample(std::size_t)>& load) {
  double positives = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto sample = load(i);
    positives += sample.target.data.cast<double>().sum();
    total += static_cast<double>(sample.target.data.size());
  }
  return total > 0.0 ? positives / total : 0.0;
}

TrainResult train(std::size_t count, const std::function<SequenceSample(std::size_t)>& load,
                  const TrainConfig& config, ModelParams init) {
  config.validate();
  init.validate();
  if (count == 0) throw ConfigError("training data set is empty");
  TrainResult result;
  result.params = std::move(init);
  result.params.w_bce = config.w_bce;

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(config.seed, 2));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < count; start += config.batch_size) {
      if (config.max_steps > 0 && result.steps >= config.max_steps) break;
      const std::size_t end = std::min(count, start + config.batch_size);
      std::vector<SequenceSample> samples;
      samples.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) samples.push_back(load(order[i]));
      std::vector<TrainingPair> batch;
      batch.reserve(samples.size());
      for (const auto& s : samples) batch.push_back({s.frames, &s.target});

      const auto grad = loss_gradient(result.params, batch, config.w_bce, config.clip_eps);
      loss_sum += grad.loss * static_cast<double>(batch.size());
      seen += batch.size();
      for (std::size_t k = 0; k < grad.kernel.size(); ++k) {
        result.params.kernel[k] -= config.learning_rate * grad.kernel[k];
      }
      result.params.bias -= config.learning_rate * grad.bias;
      ++result.steps;
    }
    if (seen == 0) break;
    result.epoch_loss.push_back(loss_sum / static_cast<double>(seen));
  }
  return result;
}

TrainResult train(std::span<const SequenceSample> samples, const TrainConfig& config, ModelParams init) {
  return train(samples.size(), [&](std::size_t i) { return samples[i]; }, config, std::move(init));
}

void write_params(const ModelParams& params, const std::filesystem::path& path) {
  params.validate();
  std::ostringstream out;
  out << params.frames << ' ' << params.kernel_size << ' ' << text::format_double(params.w_bce) << '\n';
  for (const auto& slice : params.kernel) {
    for (Eigen::Index i = 0; i < slice.rows(); ++i) {
      for (Eigen::Index j = 0; j < slice.cols(); ++j) {
        out << (j ? " " : "") << text::format_double(slice(i, j));
      }
      out << '\n';
    }
  }
  out << text::format_double(params.bias) << '\n';
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  file << out.str();
  if (!file) throw IoError("write failed for " + path.string());
}

ModelParams read_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open params file " + path.string());
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  if (tokens.size() < 3) throw ParseError(1, "params header must hold n, K and w_bce");
  ModelParams p;
  try {
    p.frames = static_cast<int>(text::parse_int(tokens[0]));
    p.kernel_size = static_cast<int>(text::parse_int(tokens[1]));
    p.w_bce = text::parse_double(tokens[2]);
    if (p.frames < 1 || p.kernel_size < 1 || p.kernel_size % 2 == 0) {
      throw std::invalid_argument("invalid n or K in params header");
    }
    const std::size_t expected = 3 + static_cast<std::size_t>(p.frames * p.kernel_size * p.kernel_size) + 1;
    if (tokens.size() != expected) {
      throw std::invalid_argument("expected " + std::to_string(expected - 3) + " values after the header, got " +
                                  std::to_string(tokens.size() - 3));
    }
    std::size_t idx = 3;
    p.kernel.assign(static_cast<std::size_t>(p.frames), Eigen::MatrixXd::Zero(p.kernel_size, p.kernel_size));
    for (auto& slice : p.kernel) {
      for (Eigen::Index i = 0; i < slice.rows(); ++i) {
        for (Eigen::Index j = 0; j < slice.cols(); ++j) slice(i, j) = text::parse_double(tokens[idx++]);
      }
    }
    p.bias = text::parse_double(tokens[idx]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(1, std::string(e.what()) + " in " + path.string());
  }
  return p;
}

void write_loss_history(std::span<const double> epoch_loss, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) out << e + 1 << ',' << text::format_double(epoch_loss[e]) << '\n';
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  file << out.str();
}

}  // namespace fco
