#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "plot.hpp"
#include "vot/checkpoint.hpp"
#include "vot/config.hpp"
#include "vot/data.hpp"
#include "vot/errors.hpp"
#include "vot/eval.hpp"
#include "vot/image_io.hpp"
#include "vot/manifest.hpp"
#include "vot/model.hpp"
#include "vot/train.hpp"
#include "vot/tum.hpp"

namespace fs = std::filesystem;
using namespace vot;

namespace {

constexpr char kEffectiveConfig[] = "effective_config.json";

void echo_config(const fs::path& dir, const std::string& json_text) {
  fs::create_directories(dir);
  data::write_text_file((dir / kEffectiveConfig).string(),
                        nlohmann::json::parse(json_text).dump(2) + "\n");
}

fs::path parent_or_cwd(const std::string& file) {
  const fs::path p = fs::path(file).parent_path();
  return p.empty() ? fs::path(".") : p;
}

// Creates the directory an output file goes into.
const std::string& output_file(const std::string& file) {
  fs::create_directories(parent_or_cwd(file));
  return file;
}

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  std::string manifest, out, motion, intrinsics;
  std::optional<std::size_t> sequences, views, stride, size, length;
  std::optional<std::uint64_t> seed;
};

void run_gen_data(const GenDataArgs& a) {
  data::DatasetSpec spec;
  if (!a.manifest.empty()) spec = data::dataset_spec_from_json(data::read_text_file(a.manifest));
  if (const char* env = std::getenv("VOT_SEED"); env != nullptr && *env != '\0') {
    config::RunConfig tmp;
    config::apply_env_overrides(tmp);
    spec.seed = tmp.train.seed;
  }
  if (a.seed) spec.seed = *a.seed;
  if (a.sequences) spec.sequences = *a.sequences;
  if (a.views) spec.views = *a.views;
  if (a.stride) spec.stride = *a.stride;
  if (a.size) spec.height = spec.width = *a.size;
  if (a.length) spec.trajectory_length = *a.length;
  if (!a.motion.empty()) spec.motion = data::motion_kind_from_string(a.motion);
  if (!a.intrinsics.empty()) spec.intrinsics = a.intrinsics;
  // Round-trip through the parser for validation.
  spec = data::dataset_spec_from_json(data::dataset_spec_to_json(spec));

  const auto dataset = data::generate_dataset(spec);
  data::write_dataset(dataset, a.out);
  echo_config(a.out, data::dataset_spec_to_json(spec));
  std::printf("wrote %zu sequences to %s\n", dataset.samples.size(), a.out.c_str());
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config, profile = "desk", data, out, resume;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
};

config::RunConfig resolve_config(const std::string& path, const std::string& profile) {
  config::RunConfig rc = path.empty() ? config::profile_defaults(profile) : config::load_run_config(path);
  config::apply_env_overrides(rc);
  return rc;
}

void check_dataset_matches(const data::Dataset& ds, const config::RunConfig& rc) {
  if (ds.samples.empty()) throw ConfigError("dataset has no sequences");
  const auto& s = ds.samples.front();
  const auto& f = s.frames.front();
  if (s.frames.size() != rc.train.views) {
    throw ConfigError("dataset has " + std::to_string(s.frames.size()) +
                      " views per sequence but the config expects " + std::to_string(rc.train.views));
  }
  if (f.height != rc.height || f.width != rc.width) {
    throw ConfigError("dataset frames are " + std::to_string(f.height) + "x" + std::to_string(f.width) +
                      " but the config expects " + std::to_string(rc.height) + "x" +
                      std::to_string(rc.width));
  }
  if (f.channels != rc.model.encoder.channels) {
    throw ConfigError("dataset frames have " + std::to_string(f.channels) +
                      " channels but the encoder expects " +
                      std::to_string(rc.model.encoder.channels));
  }
}

void run_train(const TrainArgs& a) {
  auto rc = resolve_config(a.config, a.profile);
  if (a.epochs) {
    rc.train.epochs = *a.epochs;
    rc.train.warmup_epochs = std::min(rc.train.warmup_epochs, rc.train.epochs);
  }
  if (a.seed) rc.train.seed = *a.seed;
  if (a.lr) rc.train.base_lr = *a.lr;
  rc.validate();

  const auto ds = data::load_dataset(a.data);
  check_dataset_matches(ds, rc);
  const std::string config_json = config::run_config_to_json(rc);
  echo_config(a.out, config_json);

  model::VotModel model(rc.model, rc.train.seed);
  std::optional<train::Checkpoint> resume;
  if (!a.resume.empty()) resume = train::load_checkpoint(a.resume);

  train::TrainOptions opts;
  opts.checkpoint_dir = a.out;
  opts.checkpoint_every = rc.checkpoint_every;
  opts.config_json = config_json;
  opts.resume = resume ? &*resume : nullptr;
  double epoch_sum = 0.0;
  std::size_t epoch_n = 0;
  const std::size_t steps_per_epoch = (ds.samples.size() + rc.train.batch_size - 1) / rc.train.batch_size;
  opts.on_step = [&](const train::StepRecord& r) {
    epoch_sum += r.total;
    if (++epoch_n == steps_per_epoch) {
      std::printf("epoch %zu/%zu loss %.6f lr %.3g\n", r.epoch + 1, rc.train.epochs,
                  epoch_sum / static_cast<double>(epoch_n), r.lr);
      std::fflush(stdout);
      epoch_sum = 0.0;
      epoch_n = 0;
    }
  };
  const auto result = train::train_loop(model, ds.samples, rc.train, opts);
  std::ofstream csv(fs::path(a.out) / "loss.csv");
  train::write_loss_csv(csv, result.curve);
  if (!csv) throw IoError("cannot write loss.csv in '" + a.out + "'");
  std::printf("wrote %s\n", (fs::path(a.out) / "final.ckpt").string().c_str());
}

// ---------------------------------------------------------------- predict

struct LoadedModel {
  config::RunConfig config;
  std::unique_ptr<model::VotModel> model;
};

LoadedModel load_model(const std::string& ckpt_path) {
  const auto ckpt = train::load_checkpoint(ckpt_path);
  LoadedModel out;
  try {
    out.config = config::run_config_from_json(ckpt.config_json);
  } catch (const ConfigError& e) {
    throw ConfigError("checkpoint '" + ckpt_path + "' has an unusable config: " + e.what());
  }
  out.model = std::make_unique<model::VotModel>(out.config.model, out.config.train.seed);
  train::load_model_tensors(*out.model, ckpt);
  return out;
}

struct PredictArgs {
  std::string checkpoint, images, data, sequence, out;
  std::optional<std::size_t> window;
};

void run_predict(const PredictArgs& a) {
  const auto lm = load_model(a.checkpoint);
  std::vector<Image> frames;
  std::vector<double> timestamps;
  if (!a.images.empty()) {
    auto seq = data::load_image_sequence(a.images, lm.config.height, lm.config.width);
    frames = std::move(seq.frames);
    timestamps = std::move(seq.timestamps);
  } else {
    auto s = data::load_sequence(a.data, a.sequence);
    frames = std::move(s.frames);
    timestamps = std::move(s.timestamps);
  }
  if (frames.size() < 2) {
    throw InvalidArgumentError("need at least two frames, found " + std::to_string(frames.size()));
  }
  for (const auto& f : frames) {
    if (f.height != lm.config.height || f.width != lm.config.width ||
        f.channels != lm.config.model.encoder.channels) {
      throw InvalidArgumentError("frame is " + std::to_string(f.height) + "x" + std::to_string(f.width) +
                                 "x" + std::to_string(f.channels) + " but the model expects " +
                                 std::to_string(lm.config.height) + "x" +
                                 std::to_string(lm.config.width) + "x" +
                                 std::to_string(lm.config.model.encoder.channels));
    }
  }
  const std::size_t window = a.window.value_or(lm.config.train.views);
  const auto traj = model::infer_trajectory(*lm.model, frames, timestamps, window);
  data::write_tum_trajectory(traj, output_file(a.out));
  echo_config(parent_or_cwd(a.out), config::run_config_to_json(lm.config));
  std::printf("wrote %zu poses to %s\n", traj.size(), a.out.c_str());
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string gt, est, align, segment = "per_meter(1)", json_out, csv_out;
};

void run_eval(const EvalArgs& a) {
  const auto gt = data::load_tum_trajectory(a.gt);
  const auto est = data::load_tum_trajectory(a.est);
  eval::EvalOptions opts;
  if (!a.align.empty() && a.align != "none") opts.align = eval::align_mode_from_string(a.align);
  opts.segment = eval::Segment::parse(a.segment);
  const auto report = eval::evaluate(gt, est, opts);
  const std::string text = nlohmann::json::parse(report.to_json()).dump(2);
  std::printf("%s\n", text.c_str());
  if (!a.json_out.empty()) data::write_text_file(output_file(a.json_out), text + "\n");
  if (!a.csv_out.empty()) {
    std::ofstream out(output_file(a.csv_out));
    eval::write_metrics_csv(out, {{fs::path(a.est).stem().string(), report}});
    if (!out) throw IoError("cannot write '" + a.csv_out + "'");
  }
}

// ---------------------------------------------------------------- flops

struct FlopsArgs {
  std::string config, profile = "desk";
};

void run_flops(const FlopsArgs& a) {
  const auto rc = resolve_config(a.config, a.profile);
  rc.validate();
  const std::size_t p = rc.model.encoder.patch_size;
  const std::size_t patches = (rc.height / p) * (rc.width / p);
  const auto f = decoder::count_flops(rc.model.decoder, rc.train.views, patches);
  std::printf("frames %zu, patches %zu, hidden %zu, heads %zu, layers %zu\n", rc.train.views,
              patches, rc.model.decoder.hidden_dim, rc.model.decoder.heads, rc.model.decoder.layers);
  std::printf("%-11s %14s %14s %14s %14s\n", "variant", "projections", "scores", "values", "total");
  auto row = [](const char* name, const decoder::FlopTerms& t) {
    std::printf("%-11s %14.4g %14.4g %14.4g %14.4g\n", name, t.projections, t.scores, t.values,
                t.total());
  };
  row("time_space", f.time_space);
  row("full", f.full);
  std::printf("GFLOPs: time_space %.3f, full %.3f, ratio %.4f\n", f.time_space.total() / 1e9,
              f.full.total() / 1e9, f.ratio());
}

// ---------------------------------------------------------------- plot

struct PlotTrajectoryArgs {
  std::string gt, est, out;
};

void run_plot_trajectory(const PlotTrajectoryArgs& a) {
  const auto gt = data::load_tum_trajectory(a.gt);
  std::optional<geometry::Trajectory> est;
  if (!a.est.empty()) est = data::load_tum_trajectory(a.est);
  data::write_text_file(output_file(a.out), tools::trajectory_svg(gt, est ? &*est : nullptr));
  std::printf("wrote %s\n", a.out.c_str());
}

struct PlotAttentionArgs {
  std::string checkpoint, data, sequence, out;
  std::size_t zoom = 8;
};

void run_plot_attention(const PlotAttentionArgs& a) {
  const auto lm = load_model(a.checkpoint);
  const auto s = data::load_sequence(a.data, a.sequence);
  const std::size_t views = std::min(s.frames.size(), lm.config.train.views);
  const std::span<const Image> frames(s.frames.data(), views);
  std::vector<decoder::AttentionMap> maps;
  {
    numerics::NoGradGuard no_grad;
    (void)lm.model->forward_raw(lm.model->encode(frames), &maps);
  }
  const std::size_t p = lm.config.model.encoder.patch_size;
  const auto paths = tools::write_attention_maps(maps, lm.config.height / p, lm.config.width / p,
                                                 a.zoom, a.out);
  echo_config(a.out, config::run_config_to_json(lm.config));
  std::printf("wrote %zu attention maps to %s\n", paths.size(), a.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformer visual odometry: data generation, training, inference and evaluation"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Render a synthetic dataset");
  gen_cmd->add_option("--manifest", gen.manifest, "Dataset spec JSON")->check(CLI::ExistingFile);
  gen_cmd->add_option("-o,--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--sequences", gen.sequences, "Number of sequences");
  gen_cmd->add_option("--views", gen.views, "Frames per sequence");
  gen_cmd->add_option("--stride", gen.stride, "Trajectory steps between frames");
  gen_cmd->add_option("--size", gen.size, "Square frame size in pixels");
  gen_cmd->add_option("--trajectory-length", gen.length, "Trajectory length in steps");
  gen_cmd->add_option("--motion", gen.motion, "indoor_wander or forward_dominant");
  gen_cmd->add_option("--intrinsics", gen.intrinsics, "default, wide, narrow or offset");
  gen_cmd->add_option("--seed", gen.seed, "Generation seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a generated dataset");
  train_cmd->add_option("-c,--config", tr.config, "Run config JSON")->check(CLI::ExistingFile);
  train_cmd->add_option("--profile", tr.profile, "Profile when no config is given")
      ->check(CLI::IsMember({"desk", "paper"}));
  train_cmd->add_option("-d,--data", tr.data, "Dataset directory")->required();
  train_cmd->add_option("-o,--out", tr.out, "Output directory for checkpoints")->required();
  train_cmd->add_option("--epochs", tr.epochs, "Override the number of epochs");
  train_cmd->add_option("--seed", tr.seed, "Override the training seed");
  train_cmd->add_option("--lr", tr.lr, "Override the base learning rate");
  train_cmd->add_option("--resume", tr.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "Estimate a trajectory and write it in TUM format");
  predict_cmd->add_option("-k,--checkpoint", pr.checkpoint, "Checkpoint file")->required();
  auto* images_opt = predict_cmd->add_option("--images", pr.images, "Directory of PGM/PPM frames");
  auto* data_opt = predict_cmd->add_option("-d,--data", pr.data, "Dataset directory");
  predict_cmd->add_option("-s,--sequence", pr.sequence, "Sequence id within --data")->needs(data_opt);
  predict_cmd->add_option("-o,--out", pr.out, "Output TUM file")->required();
  predict_cmd->add_option("--window", pr.window, "Frames per inference window");
  images_opt->excludes(data_opt);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Compare an estimated trajectory with ground truth");
  eval_cmd->add_option("gt", ev.gt, "Ground-truth TUM file")->required();
  eval_cmd->add_option("est", ev.est, "Estimated TUM file")->required();
  eval_cmd->add_option("--align", ev.align, "none, se3 or sim3")
      ->check(CLI::IsMember({"none", "se3", "sim3"}));
  eval_cmd->add_option("--segment", ev.segment, "per_frame_pair or per_meter(<L>)");
  eval_cmd->add_option("--json", ev.json_out, "Also write the report as JSON");
  eval_cmd->add_option("--csv", ev.csv_out, "Also write the report as CSV");

  FlopsArgs fl;
  auto* flops_cmd = app.add_subcommand("flops", "Count attention FLOPs for both decoder variants");
  flops_cmd->add_option("-c,--config", fl.config, "Run config JSON")->check(CLI::ExistingFile);
  flops_cmd->add_option("--profile", fl.profile, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));

  auto* plot_cmd = app.add_subcommand("plot", "Write figures");
  plot_cmd->require_subcommand(1);
  PlotTrajectoryArgs pt;
  auto* plot_traj = plot_cmd->add_subcommand("trajectory", "Top-down SVG of trajectories");
  plot_traj->add_option("--gt", pt.gt, "Ground-truth TUM file")->required();
  plot_traj->add_option("--est", pt.est, "Estimated TUM file");
  plot_traj->add_option("-o,--out", pt.out, "Output SVG")->required();
  PlotAttentionArgs pa;
  auto* plot_attn = plot_cmd->add_subcommand("attention", "Camera-token attention maps as PGM");
  plot_attn->add_option("-k,--checkpoint", pa.checkpoint, "Checkpoint file")->required();
  plot_attn->add_option("-d,--data", pa.data, "Dataset directory")->required();
  plot_attn->add_option("-s,--sequence", pa.sequence, "Sequence id")->required();
  plot_attn->add_option("-o,--out", pa.out, "Output directory")->required();
  plot_attn->add_option("--zoom", pa.zoom, "Pixels per patch")->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "ERROR(usage): %s\n", e.what());
    return 2;
  }

  try {
    if (*gen_cmd) run_gen_data(gen);
    if (*train_cmd) run_train(tr);
    if (*predict_cmd) {
      if (pr.images.empty() == (pr.data.empty() || pr.sequence.empty())) {
        throw InvalidArgumentError("predict needs either --images or --data with --sequence");
      }
      run_predict(pr);
    }
    if (*eval_cmd) run_eval(ev);
    if (*flops_cmd) run_flops(fl);
    if (*plot_traj) run_plot_trajectory(pt);
    if (*plot_attn) run_plot_attention(pa);
  } catch (const vot::Error& e) {
    std::fprintf(stderr, "ERROR(%s): %s\n", e.code().c_str(), e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "ERROR(io): %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ERROR(internal): %s\n", e.what());
    return 1;
  }
  return 0;
}
