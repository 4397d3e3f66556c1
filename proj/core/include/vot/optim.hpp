#pragma once

#include <cstdint>
#include <vector>

#include "vot/encoder.hpp"

namespace vot::train {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Adam with decoupled weight decay: p ← p − lr·wd·p, then the
/// bias-corrected moment update p ← p − lr·m̂ / (sqrt(v̂) + eps).
/// Only the parameters passed at construction are ever touched.
class AdamW {
 public:
  AdamW(std::vector<encoder::NamedTensor> params, AdamWConfig config);

  /// Applies one update from the parameters' current gradients. Throws
  /// vot::TrainingError naming the parameter when any gradient is non-finite;
  /// nothing is modified in that case. Parameters without a gradient are
  /// treated as having a zero gradient.
  void step(double lr);

  const AdamWConfig& config() const { return config_; }
  const std::vector<encoder::NamedTensor>& parameters() const { return params_; }
  std::uint64_t steps() const { return steps_; }

  /// First and second moments, one vector per parameter.
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  /// Restores optimizer state; sizes must match the parameters.
  void set_state(std::uint64_t steps, std::vector<std::vector<double>> m,
                 std::vector<std::vector<double>> v);

 private:
  std::vector<encoder::NamedTensor> params_;
  AdamWConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t steps_ = 0;
};

/// Scales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(const std::vector<encoder::NamedTensor>& params,
                      double max_norm);

/// Learning rate at a (fractional) epoch: linear warmup from 0 to base_lr
/// over warmup_epochs, then cosine decay to 0 at `epochs`.
double lr_at(double epoch, double base_lr, double warmup_epochs, double epochs);

}  // namespace vot::train
