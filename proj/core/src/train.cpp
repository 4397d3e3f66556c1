#include "vot/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "vot/errors.hpp"
#include "vot/numerics/ops.hpp"

namespace vot::train {

using numerics::Tensor;

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("train: " + m); };
  if (batch_size == 0) fail("batch_size must be positive");
  if (views < 2) fail("views must be >= 2");
  if (stride == 0) fail("stride must be positive");
  if (warmup_epochs > epochs) fail("warmup_epochs exceeds epochs");
  if (!(base_lr > 0) || !std::isfinite(base_lr)) fail("base_lr must be positive");
  if (!(weight_decay >= 0) || !std::isfinite(weight_decay)) {
    fail("weight_decay must be non-negative");
  }
  if (!(grad_clip >= 0)) fail("grad_clip must be non-negative");
  loss.validate();
}

double lr_at(double epoch, const TrainConfig& cfg) {
  return lr_at(epoch, cfg.base_lr, static_cast<double>(cfg.warmup_epochs),
               static_cast<double>(cfg.epochs));
}

void write_loss_csv(std::ostream& out, std::span<const StepRecord> curve) {
  out << "epoch,step,rot_loss,trans_loss,total,lr\n";
  char buf[256];
  for (const auto& r : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%llu,%.17g,%.17g,%.17g,%.17g\n", r.epoch,
                  static_cast<unsigned long long>(r.step), r.rot_loss, r.trans_loss,
                  r.total, r.lr);
    out << buf;
  }
}

BatchLoss batch_loss(const model::VotModel& model, std::span<const Tensor> features,
                     std::span<const data::SequenceSample> samples,
                     std::span<const std::size_t> batch, const head::LossConfig& loss) {
  if (batch.empty()) throw InvalidArgumentError("batch_loss: empty batch");
  const auto rep = model.config().representation;
  const std::size_t rw = head::rotation_width(rep);
  Tensor rot_sum, trans_sum;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& s = samples[batch[k]];
    const Tensor raw = model.forward_raw(features[batch[k]]);
    std::vector<geometry::Rotation> r_gt;
    std::vector<geometry::Vec3> t_gt;
    for (const auto& p : s.rel_poses_gt) {
      r_gt.push_back(p.rotation);
      t_gt.push_back(p.translation);
    }
    const Tensor rot = head::rotation_loss(
        head::rotation_from_raw(numerics::slice(raw, 1, 0, rw), rep), r_gt);
    const Tensor trans = head::translation_loss(numerics::slice(raw, 1, rw, 3), t_gt);
    rot_sum = k == 0 ? rot : numerics::add(rot_sum, rot);
    trans_sum = k == 0 ? trans : numerics::add(trans_sum, trans);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  BatchLoss out;
  out.rotation = numerics::scale(rot_sum, inv);
  out.translation = numerics::scale(trans_sum, inv);
  out.total = head::total_loss(out.rotation, out.translation, loss);
  return out;
}

namespace {

std::vector<encoder::NamedTensor> all_parameters(const model::VotModel& model) {
  auto out = model.frozen_parameters();
  for (auto& p : model.trainable_parameters()) out.push_back(std::move(p));
  return out;
}

StoredTensor store(const std::string& name, const numerics::Shape& shape,
                   std::span<const double> values) {
  return {name, shape, std::vector<double>(values.begin(), values.end())};
}

void copy_into(Tensor& t, const std::string& name, const StoredTensor* s) {
  if (s == nullptr) throw ShapeError("checkpoint has no tensor '" + name + "'");
  if (s->shape != t.shape()) {
    throw ShapeError("checkpoint tensor '" + name + "' has shape " +
                     numerics::shape_str(s->shape) + ", model expects " +
                     numerics::shape_str(t.shape()));
  }
  std::copy(s->values.begin(), s->values.end(), t.values().begin());
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ULL + epoch + 1;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<StoredTensor> model_tensors(const model::VotModel& model) {
  std::vector<StoredTensor> out;
  for (const auto& [name, t] : all_parameters(model)) {
    out.push_back(store(name, t.shape(), t.values()));
  }
  return out;
}

void load_model_tensors(model::VotModel& model, const Checkpoint& ckpt) {
  for (auto [name, t] : all_parameters(model)) copy_into(t, name, ckpt.find(name));
}

Trainer::Trainer(model::VotModel& model, std::span<const data::SequenceSample> samples,
                 TrainConfig config)
    : model_(model),
      samples_(samples),
      config_(config),
      optimizer_(model.trainable_parameters(),
                 AdamWConfig{0.9, 0.999, 1e-8, config.weight_decay}) {
  config_.validate();
  if (config_.epochs > 0 && samples_.empty()) {
    throw InvalidArgumentError("training needs at least one sample");
  }
  features_.reserve(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.frames.size() < 2 || s.rel_poses_gt.size() + 1 != s.frames.size()) {
      throw InvalidArgumentError("sample " + std::to_string(i) + " has " +
                                 std::to_string(s.frames.size()) + " frames and " +
                                 std::to_string(s.rel_poses_gt.size()) +
                                 " relative poses");
    }
    features_.push_back(model_.encode(s.frames));
  }
  shuffle_epoch();
}

std::size_t Trainer::steps_per_epoch() const {
  return (samples_.size() + config_.batch_size - 1) / config_.batch_size;
}

void Trainer::shuffle_epoch() {
  order_.resize(samples_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  rng_.seed(epoch_seed(config_.seed, epoch_));
  std::shuffle(order_.begin(), order_.end(), rng_);
}

StepRecord Trainer::step() {
  if (finished()) throw TrainingError("training already finished");
  const std::size_t per_epoch = steps_per_epoch();
  const std::size_t begin = epoch_step_ * config_.batch_size;
  const std::size_t end = std::min(begin + config_.batch_size, order_.size());
  const std::span<const std::size_t> batch(order_.data() + begin, end - begin);

  StepRecord rec;
  rec.epoch = epoch_;
  rec.step = global_step_;
  rec.lr = lr_at(static_cast<double>(epoch_) +
                     (static_cast<double>(epoch_step_) + 0.5) / static_cast<double>(per_epoch),
                 config_);
  const auto params = model_.trainable_parameters();
  for (auto [name, t] : params) t.zero_grad();
  {
    numerics::Tape tape;
    const BatchLoss loss = batch_loss(model_, features_, samples_, batch, config_.loss);
    rec.rot_loss = loss.rotation.item();
    rec.trans_loss = loss.translation.item();
    rec.total = loss.total.item();
    if (!std::isfinite(rec.total)) {
      throw TrainingError("non-finite loss at epoch " + std::to_string(epoch_) +
                          ", batch " + std::to_string(epoch_step_));
    }
    tape.backward(loss.total);
  }
  try {
    if (config_.grad_clip > 0) clip_grad_norm(params, config_.grad_clip);
    optimizer_.step(rec.lr);
  } catch (const TrainingError& e) {
    throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch_) +
                        ", batch " + std::to_string(epoch_step_));
  }
  ++global_step_;
  if (++epoch_step_ == per_epoch) {
    epoch_step_ = 0;
    ++epoch_;
    shuffle_epoch();
  }
  return rec;
}

std::vector<StepRecord> Trainer::run_epoch() {
  std::vector<StepRecord> out;
  const std::size_t e = epoch_;
  while (!finished() && epoch_ == e) out.push_back(step());
  return out;
}

Checkpoint Trainer::checkpoint(const std::string& config_json) const {
  Checkpoint c;
  c.tensors = model_tensors(model_);
  const auto& params = optimizer_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, t] = params[i];
    c.first_moments.push_back(store(name, t.shape(), optimizer_.first_moments()[i]));
    c.second_moments.push_back(store(name, t.shape(), optimizer_.second_moments()[i]));
  }
  c.optimizer_steps = optimizer_.steps();
  c.epoch = epoch_;
  c.global_step = global_step_;
  c.epoch_step = epoch_step_;
  std::ostringstream rng;
  rng << rng_;
  c.rng_state = rng.str();
  c.config_json = config_json;
  return c;
}

void Trainer::restore(const Checkpoint& ckpt) {
  load_model_tensors(model_, ckpt);
  const auto& params = optimizer_.parameters();
  if (ckpt.first_moments.size() != params.size() ||
      ckpt.second_moments.size() != params.size()) {
    throw ShapeError("checkpoint optimizer state has " +
                     std::to_string(ckpt.first_moments.size()) +
                     " tensors, model has " + std::to_string(params.size()) +
                     " trainable tensors");
  }
  std::vector<std::vector<double>> m, v;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, t] = params[i];
    for (const auto* group : {&ckpt.first_moments, &ckpt.second_moments}) {
      const auto& s = (*group)[i];
      if (s.name != name || s.shape != t.shape()) {
        throw ShapeError("checkpoint optimizer moment '" + s.name + "' " +
                         numerics::shape_str(s.shape) + " does not match '" + name +
                         "' " + numerics::shape_str(t.shape()));
      }
    }
    m.push_back(ckpt.first_moments[i].values);
    v.push_back(ckpt.second_moments[i].values);
  }
  optimizer_.set_state(ckpt.optimizer_steps, std::move(m), std::move(v));
  epoch_ = ckpt.epoch;
  global_step_ = ckpt.global_step;
  shuffle_epoch();
  epoch_step_ = ckpt.epoch_step;
  if (!ckpt.rng_state.empty()) {
    std::istringstream rng(ckpt.rng_state);
    rng >> rng_;
    if (!rng) throw ParseError("checkpoint RNG state is malformed");
  }
}

TrainResult train_loop(model::VotModel& model,
                       std::span<const data::SequenceSample> samples,
                       const TrainConfig& config, const TrainOptions& options) {
  Trainer trainer(model, samples, config);
  if (options.resume != nullptr) trainer.restore(*options.resume);
  TrainResult result;
  namespace fs = std::filesystem;
  if (!options.checkpoint_dir.empty()) fs::create_directories(options.checkpoint_dir);
  while (!trainer.finished()) {
    for (const auto& rec : trainer.run_epoch()) {
      if (options.on_step) options.on_step(rec);
      result.curve.push_back(rec);
    }
    if (!options.checkpoint_dir.empty() && options.checkpoint_every > 0 &&
        trainer.epoch() % options.checkpoint_every == 0 && !trainer.finished()) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04zu.ckpt", trainer.epoch());
      save_checkpoint(trainer.checkpoint(options.config_json),
                      (fs::path(options.checkpoint_dir) / name).string());
    }
  }
  result.checkpoint = trainer.checkpoint(options.config_json);
  if (!options.checkpoint_dir.empty()) {
    save_checkpoint(result.checkpoint,
                    (fs::path(options.checkpoint_dir) / "final.ckpt").string());
  }
  return result;
}

}  // namespace vot::train
