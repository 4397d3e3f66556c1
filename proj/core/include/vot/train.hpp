#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vot/checkpoint.hpp"
#include "vot/data.hpp"
#include "vot/head_loss.hpp"
#include "vot/model.hpp"
#include "vot/optim.hpp"

namespace vot::train {

struct TrainConfig {
  std::size_t epochs = 150;
  double base_lr = 1e-3;
  std::size_t warmup_epochs = 15;
  std::size_t batch_size = 8;
  std::size_t views = 4;
  std::size_t stride = 3;
  double weight_decay = 0.01;
  std::uint64_t seed = 1;
  /// Global gradient-norm bound; 0 disables clipping.
  double grad_clip = 1.0;
  head::LossConfig loss;

  /// Throws vot::ConfigError when a value is out of range.
  void validate() const;
};

/// Learning rate at a fractional epoch under `cfg`.
double lr_at(double epoch, const TrainConfig& cfg);

struct StepRecord {
  std::size_t epoch = 0;
  std::uint64_t step = 0;
  double rot_loss = 0.0;
  double trans_loss = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

/// Header `epoch,step,rot_loss,trans_loss,total,lr`, one row per step.
void write_loss_csv(std::ostream& out, std::span<const StepRecord> curve);

struct BatchLoss {
  numerics::Tensor rotation;     // mean geodesic angle per pose pair
  numerics::Tensor translation;  // mean L1 translation error per pose pair
  numerics::Tensor total;
};

/// Loss averaged over the samples `batch` (indices into `samples`), using
/// cached encoder features. Records on the active tape, if any.
BatchLoss batch_loss(const model::VotModel& model,
                     std::span<const numerics::Tensor> features,
                     std::span<const data::SequenceSample> samples,
                     std::span<const std::size_t> batch, const head::LossConfig& loss);

/// Model tensors (frozen and trainable) as stored in a checkpoint.
std::vector<StoredTensor> model_tensors(const model::VotModel& model);
/// Copies checkpoint tensors into `model`. Throws vot::ShapeError naming the
/// tensor when a name is missing or a shape differs.
void load_model_tensors(model::VotModel& model, const Checkpoint& ckpt);

/// Stepwise trainer over a fixed sample set. Encoder features are computed
/// once up front since the encoder never changes. Each epoch visits the
/// samples in an order drawn from (seed, epoch).
class Trainer {
 public:
  Trainer(model::VotModel& model, std::span<const data::SequenceSample> samples,
          TrainConfig config);

  const TrainConfig& config() const { return config_; }
  std::size_t steps_per_epoch() const;
  std::size_t epoch() const { return epoch_; }
  std::uint64_t global_step() const { return global_step_; }
  bool finished() const { return epoch_ >= config_.epochs; }

  /// One optimizer step on the next batch. Throws vot::TrainingError (with
  /// epoch and batch) on a non-finite loss or gradient.
  StepRecord step();
  /// Steps until the current epoch is complete.
  std::vector<StepRecord> run_epoch();

  Checkpoint checkpoint(const std::string& config_json = "{}") const;
  /// Restores model, optimizer and progress. Throws vot::ShapeError on a
  /// mismatched checkpoint.
  void restore(const Checkpoint& ckpt);

 private:
  void shuffle_epoch();

  model::VotModel& model_;
  std::span<const data::SequenceSample> samples_;
  TrainConfig config_;
  std::vector<numerics::Tensor> features_;
  AdamW optimizer_;
  std::size_t epoch_ = 0;
  std::size_t epoch_step_ = 0;
  std::uint64_t global_step_ = 0;
  std::vector<std::size_t> order_;
  std::mt19937_64 rng_;
};

struct TrainOptions {
  /// When set, `epoch_NNNN.ckpt` is written every `checkpoint_every` epochs
  /// and `final.ckpt` at the end.
  std::string checkpoint_dir;
  std::size_t checkpoint_every = 0;
  std::string config_json = "{}";
  std::function<void(const StepRecord&)> on_step;
  /// Continue from this state instead of starting fresh.
  const Checkpoint* resume = nullptr;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<StepRecord> curve;
};

TrainResult train_loop(model::VotModel& model,
                       std::span<const data::SequenceSample> samples,
                       const TrainConfig& config, const TrainOptions& options = {});

}  // namespace vot::train
