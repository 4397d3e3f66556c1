#include "vot/layers.hpp"

#include "vot/errors.hpp"
#include "vot/numerics/ops.hpp"

namespace vot::layers {

using numerics::Tensor;

namespace {

// [G, n, d] -> [G*heads, n, d_h]
Tensor split_heads(const Tensor& x, std::size_t heads) {
  const std::size_t g = x.dim(0), n = x.dim(1), d = x.dim(2);
  const std::size_t dh = d / heads;
  Tensor t = numerics::reshape(x, {g, n, heads, dh});
  t = numerics::permute(t, {0, 2, 1, 3});
  return numerics::reshape(t, {g * heads, n, dh});
}

// [G*heads, n, d_h] -> [G, n, d]
Tensor merge_heads(const Tensor& x, std::size_t groups, std::size_t heads) {
  const std::size_t n = x.dim(1), dh = x.dim(2);
  Tensor t = numerics::reshape(x, {groups, heads, n, dh});
  t = numerics::permute(t, {0, 2, 1, 3});
  return numerics::reshape(t, {groups, n, heads * dh});
}

}  // namespace

Tensor multi_head_attention(const Tensor& qk_input, const Tensor& v_input,
                            const AttentionWeights& w, std::size_t heads,
                            std::vector<double>* probs) {
  if (qk_input.rank() != 3 || qk_input.shape() != v_input.shape()) {
    throw ShapeError("multi_head_attention: inputs " +
                     numerics::shape_str(qk_input.shape()) + " and " +
                     numerics::shape_str(v_input.shape()) +
                     " must both be [G, n, d]");
  }
  const std::size_t groups = qk_input.dim(0);
  if (heads == 0 || qk_input.dim(2) % heads != 0) {
    throw ShapeError("multi_head_attention: hidden size " +
                     std::to_string(qk_input.dim(2)) +
                     " is not divisible by head count " + std::to_string(heads));
  }
  const Tensor q = split_heads(numerics::linear(qk_input, w.wq), heads);
  const Tensor k = split_heads(numerics::linear(qk_input, w.wk), heads);
  const Tensor v = split_heads(numerics::linear(v_input, w.wv), heads);
  const Tensor o = numerics::scaled_dot_attention(q, k, v, probs);
  return numerics::linear(merge_heads(o, groups, heads), w.wo);
}

Tensor gaussian(numerics::Shape shape, double stddev, std::mt19937_64& rng,
                bool requires_grad) {
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<double> values(numerics::shape_numel(shape));
  for (auto& v : values) v = normal(rng);
  return Tensor(std::move(shape), std::move(values), requires_grad);
}

}  // namespace vot::layers
