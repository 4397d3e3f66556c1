#include "vot/optim.hpp"

#include <cmath>

#include "vot/errors.hpp"

namespace vot::train {

AdamW::AdamW(std::vector<encoder::NamedTensor> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  for (const auto& [name, t] : params_) {
    m_.emplace_back(t.numel(), 0.0);
    v_.emplace_back(t.numel(), 0.0);
  }
}

void AdamW::step(double lr) {
  for (const auto& [name, t] : params_) {
    for (double g : t.grad()) {
      if (!std::isfinite(g)) {
        throw TrainingError("non-finite gradient in parameter '" + name + "'");
      }
    }
  }
  ++steps_;
  const auto& c = config_;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(steps_));
  const double decay = 1.0 - lr * c.weight_decay;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& t = params_[i].second;
    auto p = t.values();
    const auto g = t.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g.empty() ? 0.0 : g[j];
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * gj;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * gj * gj;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] = p[j] * decay - lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

void AdamW::set_state(std::uint64_t steps, std::vector<std::vector<double>> m,
                      std::vector<std::vector<double>> v) {
  if (m.size() != params_.size() || v.size() != params_.size()) {
    throw ShapeError("optimizer state has " + std::to_string(m.size()) +
                     " moment tensors, expected " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (m[i].size() != params_[i].second.numel() ||
        v[i].size() != params_[i].second.numel()) {
      throw ShapeError("optimizer moments for '" + params_[i].first +
                       "' have the wrong size");
    }
  }
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

double clip_grad_norm(const std::vector<encoder::NamedTensor>& params,
                      double max_norm) {
  double sq = 0.0;
  for (const auto& [name, t] : params) {
    for (double g : t.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto [name, t] : params) {
      for (double& g : t.grad()) g *= s;
    }
  }
  return norm;
}

double lr_at(double epoch, double base_lr, double warmup_epochs, double epochs) {
  if (epoch <= 0.0) return 0.0;
  if (epoch < warmup_epochs) return base_lr * epoch / warmup_epochs;
  if (epoch >= epochs) return 0.0;
  const double progress = (epoch - warmup_epochs) / (epochs - warmup_epochs);
  return 0.5 * base_lr * (1.0 + std::cos(3.14159265358979323846 * progress));
}

}  // namespace vot::train
