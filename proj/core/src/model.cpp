#include "vot/model.hpp"

#include <random>

#include "vot/errors.hpp"
#include "vot/numerics/ops.hpp"

namespace vot::model {

using numerics::Tensor;

void ModelConfig::validate() const {
  decoder.validate();
  if (encoder.hidden_dim != decoder.hidden_dim) {
    throw ConfigError("encoder hidden_dim " + std::to_string(encoder.hidden_dim) +
                      " differs from decoder hidden_dim " +
                      std::to_string(decoder.hidden_dim));
  }
}

namespace {
ModelConfig checked(ModelConfig c) {
  c.validate();
  return c;
}
}  // namespace

VotModel::VotModel(ModelConfig config, std::uint64_t init_seed)
    : config_(checked(config)), encoder_(config_.encoder) {
  std::mt19937_64 rng(init_seed);
  decoder_ = decoder::DecoderParams::init(config_.decoder, rng);
  head_ = head::HeadParams::init(config_.decoder.hidden_dim,
                                 config_.representation, rng);
}

Tensor VotModel::encode(std::span<const Image> frames) const {
  return encoder_.encode(frames);
}

Tensor VotModel::forward_raw(const Tensor& features,
                             std::vector<decoder::AttentionMap>* attention) const {
  const Tensor f0 = decoder::decoder_input(features, decoder_.camera_embedding);
  auto out = decoder::decoder_forward(f0, config_.decoder, decoder_,
                                      attention != nullptr);
  if (attention != nullptr) *attention = std::move(out.attention);
  return head::head_forward(out.camera_states, head_);
}

std::vector<geometry::Pose> VotModel::predict(std::span<const Image> frames) const {
  if (frames.size() < 2) {
    throw InvalidArgumentError("predict needs at least two frames");
  }
  numerics::NoGradGuard no_grad;
  return head::poses_from_raw(forward_raw(encode(frames)),
                              config_.representation);
}

std::vector<encoder::NamedTensor> VotModel::trainable_parameters() const {
  auto out = decoder_.named();
  for (auto& p : head_.named()) out.push_back(std::move(p));
  return out;
}

std::vector<encoder::NamedTensor> VotModel::frozen_parameters() const {
  return encoder_.parameters();
}

geometry::Trajectory infer_trajectory(const VotModel& model,
                                      std::span<const Image> frames,
                                      std::span<const double> timestamps,
                                      std::size_t window) {
  if (frames.empty()) throw InvalidArgumentError("infer_trajectory: no frames");
  if (frames.size() != timestamps.size()) {
    throw InvalidArgumentError("infer_trajectory: frame/timestamp count mismatch");
  }
  if (window < 2) throw InvalidArgumentError("infer_trajectory: window must be >= 2");
  std::vector<geometry::Pose> rel;
  std::size_t start = 0;
  while (start + 1 < frames.size()) {
    const std::size_t end = std::min(start + window, frames.size());
    auto step = model.predict(frames.subspan(start, end - start));
    rel.insert(rel.end(), step.begin(), step.end());
    start = end - 1;
  }
  auto traj = geometry::compose_relative(geometry::Pose::identity(), rel, timestamps);
  traj.validate();
  return traj;
}

}  // namespace vot::model
