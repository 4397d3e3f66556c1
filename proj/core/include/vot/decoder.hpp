#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vot/encoder.hpp"
#include "vot/layers.hpp"
#include "vot/numerics/tensor.hpp"

namespace vot::decoder {

enum class Variant { kTimeSpace, kFull };

std::string to_string(Variant v);
/// Accepts "time_space" and "full"; throws vot::ConfigError otherwise.
Variant variant_from_string(const std::string& s);

struct DecoderConfig {
  std::size_t layers = 4;
  std::size_t hidden_dim = 64;
  std::size_t heads = 4;
  std::size_t ff_dim = 128;
  Variant variant = Variant::kTimeSpace;

  std::size_t head_dim() const { return hidden_dim / heads; }
  /// Throws vot::ConfigError unless hidden_dim = heads * head_dim.
  void validate() const;
};

/// One decoder block. In the time-space variant the first attention
/// sub-layer runs along time for every patch position and the second along
/// space (camera token included) for every frame. The full variant keeps
/// the same parameters and sub-layer roles but lets both sub-layers attend
/// jointly over all frames and positions.
struct BlockParams {
  numerics::Tensor ln_t_gain, ln_t_bias;
  layers::AttentionWeights temporal;
  numerics::Tensor ln_s_gain, ln_s_bias;
  layers::AttentionWeights spatial;
  numerics::Tensor ln_f_gain, ln_f_bias;
  numerics::Tensor ff_w1, ff_b1, ff_w2, ff_b2;
};

struct DecoderParams {
  numerics::Tensor camera_embedding;  // [d], broadcast to every frame
  std::vector<BlockParams> blocks;

  /// Random initialization; every tensor requires grad.
  static DecoderParams init(const DecoderConfig& config, std::mt19937_64& rng);
  std::vector<encoder::NamedTensor> named() const;
};

/// Spatial attention of a frame's camera token in one layer and head.
struct AttentionMap {
  std::size_t layer = 0, head = 0, frame = 0;
  /// Softmax row over the frame's h*w+1 tokens; index 0 is the camera
  /// token itself, index 1 + k is patch k.
  std::vector<double> weights;
};

struct DecoderOutput {
  numerics::Tensor features;       // [T, h*w+1, d]
  numerics::Tensor camera_states;  // [T, d]
  std::vector<AttentionMap> attention;
};

/// F0 = [ce, F]: prepends the broadcast camera embedding to every frame.
numerics::Tensor decoder_input(const numerics::Tensor& features,
                               const numerics::Tensor& camera_embedding);

/// Temporal sub-layer (pre-norm, residual). Camera rows are copied through
/// unchanged; every patch position attends over the T frames on its own.
/// Frame-index sinusoids are added to the query/key inputs only.
numerics::Tensor temporal_attention(const numerics::Tensor& x,
                                    const BlockParams& block,
                                    const DecoderConfig& config);

/// Spatial sub-layer (pre-norm, residual): every frame attends over its own
/// h*w+1 tokens. `probs` receives [T, heads, n, n] when given.
numerics::Tensor spatial_attention(const numerics::Tensor& x,
                                   const BlockParams& block,
                                   const DecoderConfig& config,
                                   std::vector<double>* probs = nullptr);

numerics::Tensor feed_forward(const numerics::Tensor& x,
                              const BlockParams& block);

/// Runs all blocks on F0. Attention maps are collected only when requested,
/// and only for the time-space variant.
DecoderOutput decoder_forward(const numerics::Tensor& f0,
                              const DecoderConfig& config,
                              const DecoderParams& params,
                              bool export_attention = false);

/// Multiply-accumulate counts (2*m*n*k per matmul) of the attention
/// projections, score products (QKᵀ) and value products (PV). Layer norms,
/// softmax, residual adds and the feed-forward are excluded.
struct FlopTerms {
  double projections = 0.0;
  double scores = 0.0;
  double values = 0.0;

  double total() const { return projections + scores + values; }
};

struct FlopCount {
  FlopTerms time_space;
  FlopTerms full;
  /// Score term of the temporal sub-layers alone.
  double temporal_scores = 0.0;

  double ratio() const { return time_space.total() / full.total(); }
};

FlopCount count_flops(const DecoderConfig& config, std::size_t frames,
                      std::size_t patches);

}  // namespace vot::decoder
