#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "support/gradcheck.hpp"
#include "vot/decoder.hpp"
#include "vot/errors.hpp"
#include "vot/numerics/ops.hpp"

using namespace vot;
using namespace vot::decoder;
using numerics::Tensor;

namespace {

Tensor random_tensor(numerics::Shape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(numerics::shape_numel(shape));
  for (auto& x : v) x = n(rng);
  return Tensor(std::move(shape), std::move(v));
}

DecoderConfig small(std::size_t layers = 2, Variant v = Variant::kTimeSpace) {
  DecoderConfig c;
  c.layers = layers;
  c.hidden_dim = 8;
  c.heads = 2;
  c.ff_dim = 16;
  c.variant = v;
  return c;
}

DecoderParams params_for(const DecoderConfig& c, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  return DecoderParams::init(c, rng);
}

double at(const Tensor& x, std::size_t t, std::size_t s, std::size_t j) {
  return x[(t * x.dim(1) + s) * x.dim(2) + j];
}

}  // namespace

TEST(DecoderConfig, HeadsMustDivideWidth) {
  DecoderConfig c = small();
  c.heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(variant_from_string("axial"), ConfigError);
}

TEST(DecoderInput, ShapeAndContents) {
  std::mt19937_64 rng(1);
  const Tensor ce = random_tensor({8}, rng);
  const Tensor f0 = decoder_input(Tensor::zeros({2, 4, 8}), ce);
  ASSERT_EQ(f0.shape(), (numerics::Shape{2, 5, 8}));
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(at(f0, t, 0, j), ce[j]);
    for (std::size_t s = 1; s < 5; ++s) {
      for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(at(f0, t, s, j), 0.0);
    }
  }
}

TEST(DecoderInput, CameraEmbeddingGradientAggregatesFrames) {
  std::mt19937_64 rng(2);
  Tensor ce = random_tensor({8}, rng);
  const Tensor f = random_tensor({3, 4, 8}, rng), w = random_tensor({3, 5, 8}, rng);
  const auto r = vot::testing::check_gradients(
      [&] { return numerics::sum(numerics::mul(numerics::gelu(decoder_input(f, ce)), w)); },
      {{"ce", ce}});
  EXPECT_LT(r.max_rel_error, 1e-4);
  // Linear probe: the gradient is the sum of the weights over all frames.
  ce.zero_grad();
  numerics::Tape tape;
  tape.backward(numerics::sum(numerics::mul(decoder_input(f, ce), w)));
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_NEAR(ce.grad()[j], at(w, 0, 0, j) + at(w, 1, 0, j) + at(w, 2, 0, j), 1e-12);
  }
}

TEST(Temporal, CameraRowsPassThroughExactly) {
  std::mt19937_64 rng(3);
  for (auto v : {Variant::kTimeSpace, Variant::kFull}) {
    const auto c = small(1, v);
    const auto p = params_for(c);
    const Tensor x = random_tensor({3, 5, 8}, rng);
    const Tensor y = temporal_attention(x, p.blocks[0], c);
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(at(y, t, 0, j), at(x, t, 0, j));
    }
  }
}

TEST(Temporal, SingleFrameIsValuePath) {
  std::mt19937_64 rng(4);
  const auto c = small(1);
  const auto p = params_for(c);
  const auto& b = p.blocks[0];
  const Tensor x = random_tensor({1, 3, 8}, rng);
  const Tensor y = temporal_attention(x, b, c);
  // One frame: softmax over a single key is 1, leaving x + LN(x) Wv Wo.
  const Tensor patches = numerics::slice(x, 1, 1, 2);
  const Tensor expected = numerics::add(
      patches, numerics::matmul(
                   numerics::matmul(numerics::layer_norm(patches, b.ln_t_gain, b.ln_t_bias),
                                    b.temporal.wv),
                   b.temporal.wo));
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_NEAR(at(y, 0, s + 1, j), expected[s * 8 + j], 1e-12);
    }
  }
}

TEST(Temporal, NoLeakageAcrossPositions) {
  std::mt19937_64 rng(5);
  const auto c = small(1);
  const auto p = params_for(c);
  Tensor x = random_tensor({4, 4, 8}, rng);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t j = 0; j < 8; ++j) x.values()[(t * 4 + 3) * 8 + j] = at(x, t, 1, j);
  }
  const Tensor y = temporal_attention(x, p.blocks[0], c);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(at(y, t, 1, j), at(y, t, 3, j));
  }
}

TEST(Temporal, EquivariantToPositionPermutation) {
  std::mt19937_64 rng(6);
  const auto c = small(1);
  const auto p = params_for(c);
  const Tensor x = random_tensor({3, 6, 8}, rng);
  std::vector<std::size_t> perm{0, 1, 2, 3, 4, 5};
  std::shuffle(perm.begin() + 1, perm.end(), rng);
  auto apply = [&](const Tensor& in) {
    Tensor out = in.clone();
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t s = 0; s < 6; ++s) {
        for (std::size_t j = 0; j < 8; ++j) out.values()[(t * 6 + s) * 8 + j] = at(in, t, perm[s], j);
      }
    }
    return out;
  };
  const Tensor a = temporal_attention(apply(x), p.blocks[0], c);
  const Tensor b = apply(temporal_attention(x, p.blocks[0], c));
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(Spatial, NoLeakageAcrossFrames) {
  std::mt19937_64 rng(7);
  const auto c = small(1);
  const auto p = params_for(c);
  Tensor x = random_tensor({3, 5, 8}, rng);
  for (std::size_t i = 0; i < 40; ++i) x.values()[2 * 40 + i] = x[i];
  const Tensor y = spatial_attention(x, p.blocks[0], c);
  ASSERT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(y[i], y[2 * 40 + i]);
}

TEST(Spatial, CameraOnlyTokenIsValuePath) {
  std::mt19937_64 rng(8);
  const auto c = small(1);
  const auto p = params_for(c);
  const auto& b = p.blocks[0];
  const Tensor x = random_tensor({2, 1, 8}, rng);
  const Tensor y = spatial_attention(x, b, c);
  const Tensor expected = numerics::add(
      x, numerics::matmul(numerics::matmul(numerics::layer_norm(x, b.ln_s_gain, b.ln_s_bias),
                                           b.spatial.wv),
                          b.spatial.wo));
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(y[i], expected[i], 1e-12);
}

TEST(Spatial, EquivariantToFramePermutation) {
  std::mt19937_64 rng(9);
  const auto c = small(1);
  const auto p = params_for(c);
  const Tensor x = random_tensor({4, 5, 8}, rng);
  const std::size_t perm[] = {2, 0, 3, 1};
  auto apply = [&](const Tensor& in) {
    Tensor out = in.clone();
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t i = 0; i < 40; ++i) out.values()[t * 40 + i] = in[perm[t] * 40 + i];
    }
    return out;
  };
  const Tensor a = spatial_attention(apply(x), p.blocks[0], c);
  const Tensor b = apply(spatial_attention(x, p.blocks[0], c));
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(DecoderForward, NoLayersReturnsCameraEmbedding) {
  std::mt19937_64 rng(10);
  const auto c = small(0);
  const auto p = params_for(c);
  const Tensor f0 = decoder_input(random_tensor({3, 4, 8}, rng), p.camera_embedding);
  const auto out = decoder_forward(f0, c, p);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_EQ(out.camera_states[t * 8 + j], p.camera_embedding[j]);
    }
  }
}

TEST(DecoderForward, ZeroedResidualBranchesGiveIdentity) {
  std::mt19937_64 rng(11);
  for (auto v : {Variant::kTimeSpace, Variant::kFull}) {
    const auto c = small(2, v);
    auto p = params_for(c);
    for (auto& b : p.blocks) {
      for (Tensor t : {b.temporal.wv, b.temporal.wo, b.spatial.wv, b.spatial.wo, b.ff_w2, b.ff_b2}) {
        std::fill(t.values().begin(), t.values().end(), 0.0);
      }
    }
    const Tensor f0 = random_tensor({3, 5, 8}, rng);
    const auto out = decoder_forward(f0, c, p);
    for (std::size_t i = 0; i < f0.numel(); ++i) EXPECT_EQ(out.features[i], f0[i]);
  }
}

TEST(DecoderForward, AttentionMapsAreSoftmaxRows) {
  std::mt19937_64 rng(12);
  const auto c = small(2);
  const auto p = params_for(c);
  const auto out = decoder_forward(
      decoder_input(random_tensor({3, 4, 8}, rng), p.camera_embedding), c, p, true);
  ASSERT_EQ(out.attention.size(), 2u * 3 * 2);
  for (const auto& m : out.attention) {
    ASSERT_EQ(m.weights.size(), 5u);
    EXPECT_NEAR(std::accumulate(m.weights.begin(), m.weights.end(), 0.0), 1.0, 1e-7);
  }
}

TEST(DecoderForward, Deterministic) {
  std::mt19937_64 rng(13);
  const auto c = small(2);
  const auto p = params_for(c);
  const Tensor f0 = decoder_input(random_tensor({3, 4, 8}, rng), p.camera_embedding);
  const auto a = decoder_forward(f0, c, p), b = decoder_forward(f0, c, p);
  for (std::size_t i = 0; i < a.features.numel(); ++i) EXPECT_EQ(a.features[i], b.features[i]);
}

TEST(DecoderForward, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(14);
  for (auto v : {Variant::kTimeSpace, Variant::kFull}) {
    const auto c = small(2, v);
    const auto p = params_for(c, 3);
    const Tensor f = random_tensor({3, 4, 8}, rng), w = random_tensor({3, 8}, rng);
    const auto r = vot::testing::check_gradients(
        [&] {
          const auto out = decoder_forward(decoder_input(f, p.camera_embedding), c, p);
          return numerics::sum(numerics::mul(out.camera_states, w));
        },
        p.named());
    EXPECT_LT(r.max_rel_error, 1e-4) << to_string(v) << " worst " << r.worst;
  }
}

TEST(Flops, DegenerateAxesTie) {
  const auto f = count_flops(small(1), 1, 1);
  // With one frame and one patch the full variant attends over the same
  // token sets as the factorized one.
  EXPECT_EQ(f.time_space.scores, f.full.scores);
}

TEST(Flops, FactorizedIsCheaperWithRealAxes) {
  for (std::size_t t : {2, 4, 8}) {
    for (std::size_t s : {2, 16, 196}) {
      const auto f = count_flops(small(2), t, s);
      EXPECT_LT(f.time_space.total(), f.full.total());
    }
  }
}

TEST(Flops, PaperProfileRatio) {
  DecoderConfig c;
  c.layers = 12;
  c.hidden_dim = 768;
  c.heads = 12;
  c.ff_dim = 3072;
  const auto f = count_flops(c, 8, 196);
  EXPECT_LT(f.ratio(), 0.6);
  EXPECT_GT(f.ratio(), 0.0);
}

TEST(Flops, TemporalScoresQuadraticInFrames) {
  const auto a = count_flops(small(2), 4, 16), b = count_flops(small(2), 8, 16);
  EXPECT_DOUBLE_EQ(b.temporal_scores, 4.0 * a.temporal_scores);
  EXPECT_DOUBLE_EQ(b.full.scores, 4.0 * a.full.scores);
  EXPECT_GT(b.full.scores - a.full.scores, b.temporal_scores - a.temporal_scores);
}

TEST(Flops, MatchesHandCount) {
  // d=8, T=2, one patch, one layer.
  const auto f = count_flops(small(1), 2, 1);
  const double d = 8;
  const double temporal = 8 * 1 * 2 * d * d + 2 * 2 * 1 * 4 * d;  // 1 group of 2 tokens
  const double spatial = 8 * 2 * 2 * d * d + 2 * 2 * 2 * 4 * d;   // 2 groups of 2 tokens
  EXPECT_DOUBLE_EQ(f.time_space.total(), temporal + spatial);
}
