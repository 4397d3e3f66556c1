#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vot/decoder.hpp"
#include "vot/encoder.hpp"
#include "vot/geometry.hpp"
#include "vot/head_loss.hpp"
#include "vot/image.hpp"

namespace vot::model {

struct ModelConfig {
  encoder::EncoderConfig encoder;
  decoder::DecoderConfig decoder;
  head::Representation representation = head::Representation::kRotationMatrix;

  /// Throws vot::ConfigError when the encoder and decoder widths disagree or
  /// either part is invalid.
  void validate() const;
};

/// Frozen encoder + time-space decoder + camera embedding + pose head.
class VotModel {
 public:
  VotModel(ModelConfig config, std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  const encoder::FrozenEncoder& frozen_encoder() const { return encoder_; }
  decoder::DecoderParams& decoder_params() { return decoder_; }
  const decoder::DecoderParams& decoder_params() const { return decoder_; }
  head::HeadParams& head_params() { return head_; }
  const head::HeadParams& head_params() const { return head_; }

  /// Frozen features [T, h*w, d].
  numerics::Tensor encode(std::span<const Image> frames) const;

  /// Raw head outputs [T-1, output_width] from encoder features.
  numerics::Tensor forward_raw(
      const numerics::Tensor& features,
      std::vector<decoder::AttentionMap>* attention = nullptr) const;

  /// T-1 consecutive relative poses for a window of T >= 2 frames.
  std::vector<geometry::Pose> predict(std::span<const Image> frames) const;

  std::vector<encoder::NamedTensor> trainable_parameters() const;
  std::vector<encoder::NamedTensor> frozen_parameters() const;

 private:
  ModelConfig config_;
  encoder::FrozenEncoder encoder_;
  decoder::DecoderParams decoder_;
  head::HeadParams head_;
};

/// Absolute trajectory for an arbitrarily long frame sequence, starting at
/// the identity. Frames are processed in windows of `window` views that
/// overlap by one frame; relative predictions are chained.
geometry::Trajectory infer_trajectory(const VotModel& model,
                                      std::span<const Image> frames,
                                      std::span<const double> timestamps,
                                      std::size_t window);

}  // namespace vot::model
