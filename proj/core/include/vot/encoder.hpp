#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vot/image.hpp"
#include "vot/numerics/tensor.hpp"

namespace vot::encoder {

struct EncoderConfig {
  std::size_t patch_size = 16;
  std::size_t hidden_dim = 64;
  std::size_t frozen_layers = 0;
  std::size_t channels = 1;
  std::uint64_t seed = 11;
  /// Sinusoidal encoding of the flattened patch index.
  bool position_encoding = true;
};

using NamedTensor = std::pair<std::string, numerics::Tensor>;

/// Rows are patches in raster order (row k is patch (k / w, k % w)); each row
/// is the patch flattened row-major over (dy, dx, channel). Throws
/// vot::InvalidArgumentError when the image is not tiled exactly by p.
numerics::Tensor patchify(const Image& frame, std::size_t patch_size);

/// Vaswani-style table: pe[pos, 2i] = sin(pos / 10000^(2i/d)),
/// pe[pos, 2i+1] = cos(pos / 10000^(2i/d)). Shape [positions, dim].
numerics::Tensor sinusoidal_encoding(std::size_t positions, std::size_t dim);

/// Frozen stand-in for a pre-trained ViT backbone: a fixed random linear
/// patch embedding plus positional encoding, optionally followed by
/// `frozen_layers` pre-norm transformer layers with fixed random weights.
/// None of its tensors ever require gradients.
class FrozenEncoder {
 public:
  explicit FrozenEncoder(EncoderConfig config);

  const EncoderConfig& config() const { return config_; }

  /// [T, h*w, d] features for T frames of identical size.
  numerics::Tensor encode(std::span<const Image> frames) const;

  std::vector<NamedTensor> parameters() const;

 private:
  struct Layer {
    numerics::Tensor ln1_gain, ln1_bias, wq, wk, wv, wo;
    numerics::Tensor ln2_gain, ln2_bias, w1, b1, w2, b2;
  };

  numerics::Tensor embed(const Image& frame) const;

  EncoderConfig config_;
  numerics::Tensor patch_embedding_;  // [p*p*C, d]
  std::vector<Layer> layers_;
};

}  // namespace vot::encoder
