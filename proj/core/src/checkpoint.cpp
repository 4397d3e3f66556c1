#include "vot/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "vot/errors.hpp"

namespace vot::train {

using nlohmann::json;

const StoredTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

json describe(const std::vector<StoredTensor>& ts) {
  json arr = json::array();
  for (const auto& t : ts) arr.push_back({{"name", t.name}, {"shape", t.shape}});
  return arr;
}

void write_values(std::ofstream& out, const std::vector<StoredTensor>& ts) {
  for (const auto& t : ts) {
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  }
}

std::vector<StoredTensor> read_group(std::ifstream& in, const json& desc,
                                     const std::string& path) {
  std::vector<StoredTensor> out;
  for (const auto& d : desc) {
    StoredTensor t;
    t.name = d.at("name").get<std::string>();
    t.shape = d.at("shape").get<numerics::Shape>();
    t.values.resize(numerics::shape_numel(t.shape));
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    if (!in) throw ParseError(path + ": truncated tensor data for '" + t.name + "'");
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  if (!json::accept(ckpt.config_json)) {
    throw InvalidArgumentError("checkpoint config is not JSON");
  }
  const json header = {{"tensors", describe(ckpt.tensors)},
                       {"first_moments", describe(ckpt.first_moments)},
                       {"second_moments", describe(ckpt.second_moments)},
                       {"optimizer_steps", ckpt.optimizer_steps},
                       {"epoch", ckpt.epoch},
                       {"global_step", ckpt.global_step},
                       {"epoch_step", ckpt.epoch_step},
                       {"rng_state", ckpt.rng_state},
                       {"config", ckpt.config_json}};
  const std::string text = header.dump();
  const std::uint64_t size = text.size();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(kCheckpointMagic, 8);
  out.write(reinterpret_cast<const char*>(&size), sizeof size);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_values(out, ckpt.tensors);
  write_values(out, ckpt.first_moments);
  write_values(out, ckpt.second_moments);
  if (!out) throw IoError("write failed for checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw ParseError(path + ": not a checkpoint (bad magic)");
  }
  std::uint64_t size = 0;
  in.read(reinterpret_cast<char*>(&size), sizeof size);
  if (!in || size > (std::uint64_t{1} << 32)) {
    throw ParseError(path + ": bad header size");
  }
  std::string text(size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(size));
  if (!in) throw ParseError(path + ": truncated header");
  Checkpoint c;
  try {
    const json h = json::parse(text);
    c.optimizer_steps = h.at("optimizer_steps").get<std::uint64_t>();
    c.epoch = h.at("epoch").get<std::size_t>();
    c.global_step = h.at("global_step").get<std::uint64_t>();
    c.epoch_step = h.at("epoch_step").get<std::size_t>();
    c.rng_state = h.at("rng_state").get<std::string>();
    c.config_json = h.at("config").get<std::string>();
    c.tensors = read_group(in, h.at("tensors"), path);
    c.first_moments = read_group(in, h.at("first_moments"), path);
    c.second_moments = read_group(in, h.at("second_moments"), path);
  } catch (const json::exception& e) {
    throw ParseError(path + ": malformed checkpoint header: " + e.what());
  }
  return c;
}

}  // namespace vot::train
