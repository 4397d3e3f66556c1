#pragma once

#include <string>

#include "vot/model.hpp"
#include "vot/train.hpp"

namespace vot::config {

/// Everything a run needs, loaded from one JSON file:
///
///   {
///     "profile": "desk" | "paper",
///     "encoder": {"patch_size", "hidden_dim", "frozen_layers", "channels",
///                 "seed", "position_encoding"},
///     "decoder": {"layers", "hidden_dim", "heads", "ff_dim", "variant"},
///     "head":    {"representation"},
///     "train":   {"epochs", "base_lr", "warmup_epochs", "batch_size",
///                 "views", "stride", "weight_decay", "seed", "grad_clip",
///                 "checkpoint_every",
///                 "loss": {"rotation_weight", "translation_weight"}},
///     "data":    {"height", "width", "manifest"}
///   }
///
/// The profile is applied first; every other key overrides it.
struct RunConfig {
  std::string profile = "desk";
  model::ModelConfig model;
  train::TrainConfig train;
  std::size_t height = 64;
  std::size_t width = 64;
  std::string manifest;
  std::size_t checkpoint_every = 0;

  /// Throws vot::ConfigError on inconsistent values.
  void validate() const;
};

/// "desk": T=4, stride 3, batch 8, 150 epochs (15 warmup), lr 1e-3,
/// weight decay 0.01, d=64, 4 heads, 4 layers, FF 128, 64×64 frames.
/// "paper": T=8, stride 3, 224×224 RGB frames, 12 layers, d=768, 12 heads,
/// FF 3072, lr 1e-5, 30 warmup epochs out of 300.
RunConfig profile_defaults(const std::string& profile);

/// Throws vot::ConfigError on unknown keys, wrong types or invalid values.
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

/// Applies the VOT_SEED environment variable, when set, to the training
/// seed. Throws vot::ConfigError if it is not an unsigned integer.
void apply_env_overrides(RunConfig& config);

}  // namespace vot::config
