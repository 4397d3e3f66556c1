#pragma once

#include <random>
#include <vector>

#include "vot/numerics/tensor.hpp"

// Building blocks shared by the frozen encoder and the decoder.
namespace vot::layers {

/// Per-head projections stored side by side: columns [i*d_h, (i+1)*d_h) of
/// wq/wk/wv belong to head i, rows of the same range of wo likewise.
struct AttentionWeights {
  numerics::Tensor wq, wk, wv, wo;  // [d, d] each
};

/// Multi-head scaled dot-product self-attention inside independent groups.
/// `qk_input` feeds queries and keys, `v_input` feeds values; both are
/// [G, n, d]. Returns [G, n, d]. `probs`, when given, receives the weights
/// as [G, heads, n, n].
numerics::Tensor multi_head_attention(const numerics::Tensor& qk_input,
                                      const numerics::Tensor& v_input,
                                      const AttentionWeights& w,
                                      std::size_t heads,
                                      std::vector<double>* probs = nullptr);

numerics::Tensor gaussian(numerics::Shape shape, double stddev,
                          std::mt19937_64& rng, bool requires_grad);

}  // namespace vot::layers
