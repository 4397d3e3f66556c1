#include "vot/decoder.hpp"

#include <cmath>

#include "vot/errors.hpp"
#include "vot/numerics/ops.hpp"

namespace vot::decoder {

using numerics::Tensor;
namespace ops = numerics;

std::string to_string(Variant v) {
  return v == Variant::kTimeSpace ? "time_space" : "full";
}

Variant variant_from_string(const std::string& s) {
  if (s == "time_space") return Variant::kTimeSpace;
  if (s == "full") return Variant::kFull;
  throw ConfigError("unknown decoder variant '" + s +
                    "' (expected time_space or full)");
}

void DecoderConfig::validate() const {
  if (hidden_dim == 0 || heads == 0 || ff_dim == 0) {
    throw ConfigError("decoder: hidden_dim, heads and ff_dim must be positive");
  }
  if (hidden_dim % heads != 0) {
    throw ConfigError("decoder: hidden_dim " + std::to_string(hidden_dim) +
                      " is not a multiple of heads " + std::to_string(heads));
  }
}

DecoderParams DecoderParams::init(const DecoderConfig& config,
                                  std::mt19937_64& rng) {
  config.validate();
  const std::size_t d = config.hidden_dim, ff = config.ff_dim;
  const double s_in = 1.0 / std::sqrt(static_cast<double>(d));
  const double depth = std::sqrt(2.0 * static_cast<double>(std::max<std::size_t>(config.layers, 1)));
  const double s_out = s_in / depth;
  const double s_ff_out = 1.0 / std::sqrt(static_cast<double>(ff)) / depth;
  auto g = [&](numerics::Shape shape, double sd) {
    return layers::gaussian(std::move(shape), sd, rng, true);
  };
  auto ones = [&] { return Tensor::full({d}, 1.0, true); };
  auto zeros = [&](std::size_t n) { return Tensor::zeros({n}, true); };
  auto attn = [&] {
    return layers::AttentionWeights{g({d, d}, s_in), g({d, d}, s_in),
                                    g({d, d}, s_in), g({d, d}, s_out)};
  };

  DecoderParams p;
  p.camera_embedding = g({d}, 1.0);
  for (std::size_t l = 0; l < config.layers; ++l) {
    BlockParams b;
    b.ln_t_gain = ones();
    b.ln_t_bias = zeros(d);
    b.temporal = attn();
    b.ln_s_gain = ones();
    b.ln_s_bias = zeros(d);
    b.spatial = attn();
    b.ln_f_gain = ones();
    b.ln_f_bias = zeros(d);
    b.ff_w1 = g({d, ff}, s_in);
    b.ff_b1 = zeros(ff);
    b.ff_w2 = g({ff, d}, s_ff_out);
    b.ff_b2 = zeros(d);
    p.blocks.push_back(std::move(b));
  }
  return p;
}

std::vector<encoder::NamedTensor> DecoderParams::named() const {
  std::vector<encoder::NamedTensor> out{{"decoder.camera_embedding",
                                         camera_embedding}};
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const auto& b = blocks[l];
    const std::string p = "decoder.block" + std::to_string(l) + ".";
    out.insert(out.end(), {{p + "ln_t_gain", b.ln_t_gain},
                           {p + "ln_t_bias", b.ln_t_bias},
                           {p + "temporal.wq", b.temporal.wq},
                           {p + "temporal.wk", b.temporal.wk},
                           {p + "temporal.wv", b.temporal.wv},
                           {p + "temporal.wo", b.temporal.wo},
                           {p + "ln_s_gain", b.ln_s_gain},
                           {p + "ln_s_bias", b.ln_s_bias},
                           {p + "spatial.wq", b.spatial.wq},
                           {p + "spatial.wk", b.spatial.wk},
                           {p + "spatial.wv", b.spatial.wv},
                           {p + "spatial.wo", b.spatial.wo},
                           {p + "ln_f_gain", b.ln_f_gain},
                           {p + "ln_f_bias", b.ln_f_bias},
                           {p + "ff_w1", b.ff_w1},
                           {p + "ff_b1", b.ff_b1},
                           {p + "ff_w2", b.ff_w2},
                           {p + "ff_b2", b.ff_b2}});
  }
  return out;
}

Tensor decoder_input(const Tensor& features, const Tensor& camera_embedding) {
  if (features.rank() != 3 || camera_embedding.rank() != 1 ||
      camera_embedding.dim(0) != features.dim(2)) {
    throw ShapeError("decoder_input: features " +
                     numerics::shape_str(features.shape()) +
                     " and camera embedding " +
                     numerics::shape_str(camera_embedding.shape()) +
                     " are incompatible");
  }
  const std::size_t t = features.dim(0), d = features.dim(2);
  const Tensor ce = ops::reshape(ops::repeat(camera_embedding, t), {t, 1, d});
  return ops::concat({ce, features}, 1);
}

namespace {

void check_stream(const Tensor& x, const DecoderConfig& config) {
  if (x.rank() != 3 || x.dim(2) != config.hidden_dim) {
    throw ShapeError("decoder: expected [T, h*w+1, " +
                     std::to_string(config.hidden_dim) + "], got " +
                     numerics::shape_str(x.shape()));
  }
}

// Frame-index sinusoids laid out to match `tokens_per_frame` tokens of each
// of the T frames, either grouped by position ([P, T, d]) or flattened in
// frame-major order ([1, T*P, d]).
Tensor time_code(std::size_t frames, std::size_t tokens_per_frame,
                 std::size_t d, bool frame_major) {
  const Tensor pe = encoder::sinusoidal_encoding(frames, d);
  const Tensor by_pos = ops::repeat(pe, tokens_per_frame);  // [P, T, d]
  if (!frame_major) return by_pos;
  return ops::reshape(ops::permute(by_pos, {1, 0, 2}),
                      {1, frames * tokens_per_frame, d});
}

}  // namespace

Tensor temporal_attention(const Tensor& x, const BlockParams& block,
                          const DecoderConfig& config) {
  check_stream(x, config);
  const std::size_t t = x.dim(0), n = x.dim(1), d = x.dim(2);
  const Tensor camera = ops::slice(x, 1, 0, 1);
  if (n == 1) return x;
  const std::size_t s = n - 1;
  const Tensor patches = ops::slice(x, 1, 1, s);
  const Tensor normed = ops::layer_norm(patches, block.ln_t_gain, block.ln_t_bias);

  Tensor update;
  if (config.variant == Variant::kTimeSpace) {
    const Tensor by_pos = ops::permute(normed, {1, 0, 2});  // [S, T, d]
    const Tensor qk = ops::add(by_pos, time_code(t, s, d, false));
    const Tensor out =
        layers::multi_head_attention(qk, by_pos, block.temporal, config.heads);
    update = ops::permute(out, {1, 0, 2});
  } else {
    const Tensor joint = ops::reshape(normed, {1, t * s, d});
    const Tensor qk = ops::add(joint, time_code(t, s, d, true));
    const Tensor out =
        layers::multi_head_attention(qk, joint, block.temporal, config.heads);
    update = ops::reshape(out, {t, s, d});
  }
  return ops::concat({camera, ops::add(patches, update)}, 1);
}

Tensor spatial_attention(const Tensor& x, const BlockParams& block,
                         const DecoderConfig& config,
                         std::vector<double>* probs) {
  check_stream(x, config);
  const Tensor normed = ops::layer_norm(x, block.ln_s_gain, block.ln_s_bias);
  if (config.variant == Variant::kTimeSpace) {
    return ops::add(x, layers::multi_head_attention(normed, normed, block.spatial,
                                                    config.heads, probs));
  }
  const std::size_t t = x.dim(0), n = x.dim(1), d = x.dim(2);
  const Tensor joint = ops::reshape(normed, {1, t * n, d});
  const Tensor qk = ops::add(joint, time_code(t, n, d, true));
  const Tensor out =
      layers::multi_head_attention(qk, joint, block.spatial, config.heads);
  return ops::add(x, ops::reshape(out, {t, n, d}));
}

Tensor feed_forward(const Tensor& x, const BlockParams& block) {
  const Tensor normed = ops::layer_norm(x, block.ln_f_gain, block.ln_f_bias);
  const Tensor hidden = ops::gelu(ops::linear(normed, block.ff_w1, &block.ff_b1));
  return ops::add(x, ops::linear(hidden, block.ff_w2, &block.ff_b2));
}

DecoderOutput decoder_forward(const Tensor& f0, const DecoderConfig& config,
                              const DecoderParams& params,
                              bool export_attention) {
  config.validate();
  check_stream(f0, config);
  if (params.blocks.size() != config.layers) {
    throw ShapeError("decoder: config has " + std::to_string(config.layers) +
                     " layers but parameters hold " +
                     std::to_string(params.blocks.size()));
  }
  const std::size_t t = f0.dim(0), n = f0.dim(1), d = f0.dim(2);
  const bool collect = export_attention && config.variant == Variant::kTimeSpace;

  DecoderOutput out;
  Tensor x = f0;
  std::vector<double> probs;
  for (std::size_t l = 0; l < params.blocks.size(); ++l) {
    const auto& block = params.blocks[l];
    x = temporal_attention(x, block, config);
    x = spatial_attention(x, block, config, collect ? &probs : nullptr);
    x = feed_forward(x, block);
    if (collect) {
      // probs is [T, heads, n, n]; keep row 0 (the camera token's query).
      for (std::size_t f = 0; f < t; ++f) {
        for (std::size_t h = 0; h < config.heads; ++h) {
          const double* row = probs.data() + ((f * config.heads + h) * n) * n;
          out.attention.push_back({l, h, f, std::vector<double>(row, row + n)});
        }
      }
    }
  }
  out.features = x;
  out.camera_states = ops::reshape(ops::slice(x, 1, 0, 1), {t, d});
  return out;
}

}  // namespace vot::decoder
