#include "vot/encoder.hpp"

#include <cmath>
#include <random>

#include "vot/errors.hpp"
#include "vot/layers.hpp"
#include "vot/numerics/ops.hpp"

namespace vot::encoder {

using numerics::Tensor;

Tensor patchify(const Image& frame, std::size_t p) {
  if (p == 0 || frame.height == 0 || frame.width == 0 ||
      frame.height % p != 0 || frame.width % p != 0) {
    throw InvalidArgumentError(
        "patchify: image " + std::to_string(frame.height) + "x" +
        std::to_string(frame.width) + " (H x W) is not divisible by patch size " +
        std::to_string(p));
  }
  const std::size_t h = frame.height / p, w = frame.width / p;
  const std::size_t c = frame.channels;
  const std::size_t row_len = p * p * c;
  std::vector<double> out(h * w * row_len);
  for (std::size_t k = 0; k < h * w; ++k) {
    const std::size_t r0 = (k / w) * p, c0 = (k % w) * p;
    double* dst = out.data() + k * row_len;
    for (std::size_t dy = 0; dy < p; ++dy) {
      for (std::size_t dx = 0; dx < p; ++dx) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          *dst++ = frame.at(r0 + dy, c0 + dx, ch);
        }
      }
    }
  }
  return Tensor({h * w, row_len}, std::move(out));
}

Tensor sinusoidal_encoding(std::size_t positions, std::size_t dim) {
  std::vector<double> pe(positions * dim);
  for (std::size_t pos = 0; pos < positions; ++pos) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double pair = static_cast<double>(i - i % 2);
      const double freq = std::pow(10000.0, -pair / static_cast<double>(dim));
      const double arg = static_cast<double>(pos) * freq;
      pe[pos * dim + i] = (i % 2 == 0) ? std::sin(arg) : std::cos(arg);
    }
  }
  return Tensor({positions, dim}, std::move(pe));
}

FrozenEncoder::FrozenEncoder(EncoderConfig config) : config_(config) {
  if (config_.patch_size == 0 || config_.hidden_dim == 0 ||
      config_.channels == 0) {
    throw InvalidArgumentError(
        "encoder: patch_size, hidden_dim and channels must be positive");
  }
  std::mt19937_64 rng(config_.seed);
  const std::size_t in = config_.patch_size * config_.patch_size * config_.channels;
  const std::size_t d = config_.hidden_dim;
  patch_embedding_ =
      layers::gaussian({in, d}, 1.0 / std::sqrt(static_cast<double>(in)), rng,
                       false);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t l = 0; l < config_.frozen_layers; ++l) {
    Layer layer{
        Tensor::full({d}, 1.0), Tensor::zeros({d}),
        layers::gaussian({d, d}, s, rng, false),
        layers::gaussian({d, d}, s, rng, false),
        layers::gaussian({d, d}, s, rng, false),
        layers::gaussian({d, d}, s, rng, false),
        Tensor::full({d}, 1.0), Tensor::zeros({d}),
        layers::gaussian({d, 2 * d}, s, rng, false), Tensor::zeros({2 * d}),
        layers::gaussian({2 * d, d}, s / std::sqrt(2.0), rng, false),
        Tensor::zeros({d})};
    layers_.push_back(std::move(layer));
  }
}

Tensor FrozenEncoder::embed(const Image& frame) const {
  if (frame.channels != config_.channels) {
    throw InvalidArgumentError("encoder: expected " +
                               std::to_string(config_.channels) +
                               " channels, frame has " +
                               std::to_string(frame.channels));
  }
  Tensor tokens = numerics::linear(patchify(frame, config_.patch_size),
                                   patch_embedding_);
  if (config_.position_encoding) {
    tokens = numerics::add(
        tokens, sinusoidal_encoding(tokens.dim(0), config_.hidden_dim));
  }
  return tokens;
}

Tensor FrozenEncoder::encode(std::span<const Image> frames) const {
  if (frames.empty()) throw InvalidArgumentError("encoder: no frames");
  numerics::NoGradGuard no_grad;
  std::vector<Tensor> per_frame;
  per_frame.reserve(frames.size());
  for (const auto& f : frames) {
    if (f.height != frames[0].height || f.width != frames[0].width) {
      throw InvalidArgumentError("encoder: frames differ in size");
    }
    const Tensor t = embed(f);
    per_frame.push_back(numerics::reshape(t, {1, t.dim(0), t.dim(1)}));
  }
  Tensor x = numerics::concat(per_frame, 0);

  const std::size_t d = config_.hidden_dim;
  const std::size_t heads = d % 4 == 0 ? 4 : 1;
  for (const auto& layer : layers_) {
    const Tensor n1 = numerics::layer_norm(x, layer.ln1_gain, layer.ln1_bias);
    x = numerics::add(
        x, layers::multi_head_attention(
               n1, n1, {layer.wq, layer.wk, layer.wv, layer.wo}, heads));
    const Tensor n2 = numerics::layer_norm(x, layer.ln2_gain, layer.ln2_bias);
    const Tensor hidden =
        numerics::gelu(numerics::linear(n2, layer.w1, &layer.b1));
    x = numerics::add(x, numerics::linear(hidden, layer.w2, &layer.b2));
  }
  return x;
}

std::vector<NamedTensor> FrozenEncoder::parameters() const {
  std::vector<NamedTensor> out{{"encoder.patch_embedding", patch_embedding_}};
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    const std::string p = "encoder.layer" + std::to_string(l) + ".";
    out.insert(out.end(), {{p + "ln1_gain", L.ln1_gain},
                           {p + "ln1_bias", L.ln1_bias},
                           {p + "wq", L.wq},
                           {p + "wk", L.wk},
                           {p + "wv", L.wv},
                           {p + "wo", L.wo},
                           {p + "ln2_gain", L.ln2_gain},
                           {p + "ln2_bias", L.ln2_bias},
                           {p + "w1", L.w1},
                           {p + "b1", L.b1},
                           {p + "w2", L.w2},
                           {p + "b2", L.b2}});
  }
  return out;
}

}  // namespace vot::encoder
