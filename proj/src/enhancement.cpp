#include <cmath>
#include <map>

#include "fco/enhancement.hpp"

namespace fco {

PoseHistory PoseHistory::from(const SequenceSample& sample) {
  PoseHistory h;
  h.t_now = sample.t;
  h.frames = sample.history;
  for (std::size_t k = 0; k < sample.history.size(); ++k) h.times.push_back(sample.frame_time(k));
  return h;
}

ProbGrid enhance_identity(std::span<const BinaryGrid> frames) {
  if (frames.empty()) throw InputError("identity enhancer needs at least one frame");
  return to_probability(frames.back());
}

namespace {

struct Sighting {
  double t;
  VehiclePose pose;
};

std::map<VehicleId, std::vector<Sighting>> sightings(const PoseHistory& history) {
  if (history.times.size() != history.frames.size()) throw InputError("history times and frames differ in length");
  std::map<VehicleId, std::vector<Sighting>> out;
  for (std::size_t k = 0; k < history.frames.size(); ++k) {
    for (const auto& p : history.frames[k]) out[p.id].push_back({history.times[k], p});
  }
  return out;
}

}  // namespace

std::vector<VehiclePose> persistence_poses(const PoseHistory& history) {
  std::vector<VehiclePose> out;
  for (const auto& [id, seen] : sightings(history)) out.push_back(seen.back().pose);
  return out;
}

ProbGrid enhance_persistence(const PoseHistory& history, const GridSpec& spec) {
  return to_probability(rasterize(persistence_poses(history), spec));
}

std::vector<VehiclePose> const_velocity_poses(const PoseHistory& history) {
  std::vector<VehiclePose> out;
  for (const auto& [id, seen] : sightings(history)) {
    VehiclePose pose = seen.back().pose;
    if (seen.size() >= 2) {
      const auto& prev = seen[seen.size() - 2];
      const auto& last = seen.back();
      const double elapsed = last.t - prev.t;
      if (elapsed > 0.0) {
        const Vec2 velocity = (last.pose.position - prev.pose.position) / elapsed;
        pose.position = last.pose.position + velocity * (history.t_now - last.t);
        const double speed = velocity.norm();
        pose.speed = speed;
        if (speed > kHeadingSpeed) {
          pose.heading = geometry::normalize_angle(std::atan2(velocity.y(), velocity.x()));
        }
      }
    }
    out.push_back(pose);
  }
  return out;
}

ProbGrid enhance_const_velocity(const PoseHistory& history, const GridSpec& spec) {
  return to_probability(rasterize(const_velocity_poses(history), spec));
}

ProbGrid enhance_oracle(std::span<const VehiclePose> window_set, const GridSpec& spec) {
  return to_probability(rasterize(window_set, spec));
}

namespace {

class IdentityEnhancer final : public Enhancer {
 public:
  std::string name() const override { return "identity"; }
  ProbGrid enhance(const SequenceSample& s) const override { return enhance_identity(s.frames); }
};

class PersistenceEnhancer final : public Enhancer {
 public:
  std::string name() const override { return "persistence"; }
  ProbGrid enhance(const SequenceSample& s) const override {
    return enhance_persistence(PoseHistory::from(s), s.spec);
  }
};

class ConstVelocityEnhancer final : public Enhancer {
 public:
  std::string name() const override { return "cv"; }
  ProbGrid enhance(const SequenceSample& s) const override {
    return enhance_const_velocity(PoseHistory::from(s), s.spec);
  }
};

class OracleEnhancer final : public Enhancer {
 public:
  std::string name() const override { return "oracle"; }
  ProbGrid enhance(const SequenceSample& s) const override { return enhance_oracle(s.window_set, s.spec); }
};

class ModelEnhancer final : public Enhancer {
 public:
  explicit ModelEnhancer(ModelParams params) : params_(std::move(params)) { params_.validate(); }
  std::string name() const override { return "model"; }
  ProbGrid enhance(const SequenceSample& s) const override { return model_forward(s.frames, params_); }

 private:
  ModelParams params_;
};

}  // namespace

std::unique_ptr<Enhancer> make_enhancer(EnhancerKind kind, const ModelParams* params) {
  switch (kind) {
    case EnhancerKind::Identity: return std::make_unique<IdentityEnhancer>();
    case EnhancerKind::Persistence: return std::make_unique<PersistenceEnhancer>();
    case EnhancerKind::ConstVelocity: return std::make_unique<ConstVelocityEnhancer>();
    case EnhancerKind::Oracle: return std::make_unique<OracleEnhancer>();
    case EnhancerKind::Model:
      if (params == nullptr) throw ConfigError("the model enhancer needs parameters");
      return std::make_unique<ModelEnhancer>(*params);
  }
  throw ConfigError("unknown enhancer");
}

}  // namespace fco
