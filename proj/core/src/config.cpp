#include "vot/config.hpp"

#include <cstdlib>
#include <json.hpp>

#include "vot/errors.hpp"
#include "vot/manifest.hpp"

namespace vot::config {

using nlohmann::json;

void RunConfig::validate() const {
  model.validate();
  train.validate();
  const std::size_t p = model.encoder.patch_size;
  if (p == 0 || height == 0 || width == 0 || height % p != 0 || width % p != 0) {
    throw ConfigError("data: frame size " + std::to_string(height) + "x" +
                      std::to_string(width) + " is not tiled by patch_size " +
                      std::to_string(p));
  }
  if (model.encoder.channels != 1 && model.encoder.channels != 3) {
    throw ConfigError("encoder: channels must be 1 or 3");
  }
}

RunConfig profile_defaults(const std::string& profile) {
  RunConfig c;
  c.profile = profile;
  if (profile == "desk") return c;
  if (profile != "paper") {
    throw ConfigError("unknown profile '" + profile + "' (expected desk or paper)");
  }
  c.height = c.width = 224;
  c.model.encoder.patch_size = 16;
  c.model.encoder.hidden_dim = 768;
  c.model.encoder.channels = 3;
  c.model.decoder.layers = 12;
  c.model.decoder.hidden_dim = 768;
  c.model.decoder.heads = 12;
  c.model.decoder.ff_dim = 3072;
  c.train.views = 8;
  c.train.stride = 3;
  c.train.base_lr = 1e-5;
  c.train.warmup_epochs = 30;
  c.train.epochs = 300;
  return c;
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> keys,
                const std::string& section) {
  if (!j.is_object()) throw ConfigError(section + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError("unknown key '" + k + "' in " + section);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(section + "." + key + " has the wrong type");
  }
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"profile", "encoder", "decoder", "head", "train", "data"}, "config");
  std::string profile = "desk";
  read(j, "profile", profile, "config");
  RunConfig c = profile_defaults(profile);

  if (j.contains("encoder")) {
    const auto& e = j["encoder"];
    check_keys(e, {"patch_size", "hidden_dim", "frozen_layers", "channels", "seed",
                   "position_encoding"},
               "encoder");
    read(e, "patch_size", c.model.encoder.patch_size, "encoder");
    read(e, "hidden_dim", c.model.encoder.hidden_dim, "encoder");
    read(e, "frozen_layers", c.model.encoder.frozen_layers, "encoder");
    read(e, "channels", c.model.encoder.channels, "encoder");
    read(e, "seed", c.model.encoder.seed, "encoder");
    read(e, "position_encoding", c.model.encoder.position_encoding, "encoder");
  }
  if (j.contains("decoder")) {
    const auto& d = j["decoder"];
    check_keys(d, {"layers", "hidden_dim", "heads", "ff_dim", "variant"}, "decoder");
    read(d, "layers", c.model.decoder.layers, "decoder");
    read(d, "hidden_dim", c.model.decoder.hidden_dim, "decoder");
    read(d, "heads", c.model.decoder.heads, "decoder");
    read(d, "ff_dim", c.model.decoder.ff_dim, "decoder");
    std::string variant = decoder::to_string(c.model.decoder.variant);
    read(d, "variant", variant, "decoder");
    c.model.decoder.variant = decoder::variant_from_string(variant);
  }
  if (j.contains("head")) {
    const auto& h = j["head"];
    check_keys(h, {"representation"}, "head");
    std::string rep = head::to_string(c.model.representation);
    read(h, "representation", rep, "head");
    try {
      c.model.representation = head::representation_from_string(rep);
    } catch (const Error& e) {
      throw ConfigError(std::string("head: ") + e.what());
    }
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    check_keys(t, {"epochs", "base_lr", "warmup_epochs", "batch_size", "views", "stride",
                   "weight_decay", "seed", "grad_clip", "checkpoint_every", "loss"},
               "train");
    read(t, "epochs", c.train.epochs, "train");
    read(t, "base_lr", c.train.base_lr, "train");
    read(t, "warmup_epochs", c.train.warmup_epochs, "train");
    read(t, "batch_size", c.train.batch_size, "train");
    read(t, "views", c.train.views, "train");
    read(t, "stride", c.train.stride, "train");
    read(t, "weight_decay", c.train.weight_decay, "train");
    read(t, "seed", c.train.seed, "train");
    read(t, "grad_clip", c.train.grad_clip, "train");
    read(t, "checkpoint_every", c.checkpoint_every, "train");
    if (t.contains("loss")) {
      const auto& l = t["loss"];
      check_keys(l, {"rotation_weight", "translation_weight"}, "train.loss");
      read(l, "rotation_weight", c.train.loss.rotation_weight, "train.loss");
      read(l, "translation_weight", c.train.loss.translation_weight, "train.loss");
    }
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, {"height", "width", "manifest"}, "data");
    read(d, "height", c.height, "data");
    read(d, "width", c.width, "data");
    read(d, "manifest", c.manifest, "data");
  }
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  const auto& e = c.model.encoder;
  const auto& d = c.model.decoder;
  const auto& t = c.train;
  const json j = {
      {"profile", c.profile},
      {"encoder",
       {{"patch_size", e.patch_size},
        {"hidden_dim", e.hidden_dim},
        {"frozen_layers", e.frozen_layers},
        {"channels", e.channels},
        {"seed", e.seed},
        {"position_encoding", e.position_encoding}}},
      {"decoder",
       {{"layers", d.layers},
        {"hidden_dim", d.hidden_dim},
        {"heads", d.heads},
        {"ff_dim", d.ff_dim},
        {"variant", decoder::to_string(d.variant)}}},
      {"head", {{"representation", head::to_string(c.model.representation)}}},
      {"train",
       {{"epochs", t.epochs},
        {"base_lr", t.base_lr},
        {"warmup_epochs", t.warmup_epochs},
        {"batch_size", t.batch_size},
        {"views", t.views},
        {"stride", t.stride},
        {"weight_decay", t.weight_decay},
        {"seed", t.seed},
        {"grad_clip", t.grad_clip},
        {"checkpoint_every", c.checkpoint_every},
        {"loss",
         {{"rotation_weight", t.loss.rotation_weight},
          {"translation_weight", t.loss.translation_weight}}}}},
      {"data", {{"height", c.height}, {"width", c.width}, {"manifest", c.manifest}}}};
  return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
  try {
    return run_config_from_json(data::read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_env_overrides(RunConfig& config) {
  const char* seed = std::getenv("VOT_SEED");
  if (seed == nullptr || *seed == '\0') return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(seed, &end, 10);
  if (*end != '\0' || seed[0] == '-') {
    throw ConfigError(std::string("VOT_SEED='") + seed + "' is not an unsigned integer");
  }
  config.train.seed = v;
}

}  // namespace vot::config
