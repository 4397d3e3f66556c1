#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vot/numerics/tensor.hpp"

namespace vot::train {

struct StoredTensor {
  std::string name;
  numerics::Shape shape;
  std::vector<double> values;
};

/// Everything needed to resume training exactly: model tensors (frozen
/// encoder included), optimizer moments, progress counters, the shuffle RNG
/// state and the effective configuration as JSON.
struct Checkpoint {
  std::vector<StoredTensor> tensors;
  std::vector<StoredTensor> first_moments;
  std::vector<StoredTensor> second_moments;
  std::uint64_t optimizer_steps = 0;
  std::size_t epoch = 0;         // epochs completed
  std::uint64_t global_step = 0;  // optimizer steps taken
  std::size_t epoch_step = 0;     // steps taken within the current epoch
  std::string rng_state;
  std::string config_json = "{}";

  const StoredTensor* find(const std::string& name) const;
};

inline constexpr char kCheckpointMagic[] = "VOTCKPT1";

/// Layout: the 8-byte magic "VOTCKPT1", a little-endian uint64 header size,
/// a JSON header (tensor names and shapes, counters, RNG state, config),
/// then every tensor's values as little-endian IEEE-754 doubles in header
/// order. Throws vot::IoError on I/O failure.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

/// Throws vot::IoError when the file cannot be read and vot::ParseError on a
/// bad magic, malformed header or truncated payload.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace vot::train
