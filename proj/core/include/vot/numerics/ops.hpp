#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vot/numerics/tensor.hpp"

// Differentiable primitives. Every op validates shapes up front and throws
// vot::ShapeError naming the offending shapes. Broadcasting exists only for
// bias-style addition of a rank-1 tensor along the last axis.

namespace vot::numerics {

/// a + b. `b` may also be a rank-1 tensor matching a's last dimension.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor abs(const Tensor& a);
Tensor gelu(const Tensor& a);

/// Sum / mean of all elements as a rank-0 tensor.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// [m,k]x[k,n], [B,m,k]x[k,n] (shared right operand) or [B,m,k]x[B,k,n].
Tensor matmul(const Tensor& a, const Tensor& b);

/// x[..., in] * w[in, out] + bias[out]. `bias` may be omitted.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor* bias = nullptr);

Tensor softmax_lastdim(const Tensor& x);

/// Normalizes each last-axis row to zero mean, unit variance, then applies
/// gain and bias (both rank-1 of the last dimension).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-10);

/// softmax(q kᵀ / sqrt(d_h)) v over batches: q [B,n,dh], k [B,m,dh],
/// v [B,m,dv] -> [B,n,dv]. When `probs` is given it receives the attention
/// weights, shape [B,n,m] flattened.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            std::vector<double>* probs = nullptr);

Tensor reshape(const Tensor& x, Shape shape);
/// Output axis i is input axis `axes[i]`.
Tensor permute(const Tensor& x, std::span<const std::size_t> axes);
inline Tensor permute(const Tensor& x, std::initializer_list<std::size_t> axes) {
  return permute(x, std::span<const std::size_t>(axes.begin(), axes.size()));
}
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start,
             std::size_t length);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
inline Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}
/// Stacks `n` copies of x along a new leading axis.
Tensor repeat(const Tensor& x, std::size_t n);

}  // namespace vot::numerics
