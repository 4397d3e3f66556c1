#include <random>

#include "vot/data.hpp"
#include "vot/errors.hpp"

namespace vot::data {

using geometry::Pose;

std::optional<SequenceSample> make_sequence(const World& world,
                                            const std::vector<Pose>& trajectory,
                                            std::size_t views, std::size_t stride,
                                            std::size_t start,
                                            const Intrinsics& intrinsics,
                                            std::size_t height, std::size_t width) {
  if (views < 1 || stride < 1) {
    throw InvalidArgumentError("make_sequence: views and stride must be >= 1");
  }
  const std::size_t last = start + (views - 1) * stride;
  if (last >= trajectory.size()) {
    throw InvalidArgumentError(
        "make_sequence: start " + std::to_string(start) + " + (T-1)*stride " +
        std::to_string((views - 1) * stride) + " exceeds trajectory length " +
        std::to_string(trajectory.size()));
  }
  SequenceSample s;
  s.intrinsics = intrinsics;
  for (std::size_t k = 0; k < views; ++k) {
    const std::size_t idx = start + k * stride;
    s.abs_poses_gt.push_back(trajectory[idx]);
    s.timestamps.push_back(static_cast<double>(idx) / kFrameRate);
  }
  s.rel_poses_gt = geometry::relative_poses(s.abs_poses_gt);
  for (const auto& rel : s.rel_poses_gt) {
    if (rel.translation.norm() > kMaxStepTranslation) return std::nullopt;
  }
  for (const auto& pose : s.abs_poses_gt) {
    s.frames.push_back(render(world, pose, intrinsics, height, width));
  }
  return s;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t index,
                     std::uint64_t attempt, std::uint64_t salt) {
  return mix(mix(mix(mix(seed) ^ index) ^ attempt) ^ salt);
}

constexpr std::size_t kMaxAttempts = 1000;

std::string sequence_id(std::size_t i) {
  std::string s = std::to_string(i);
  return "seq_" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

}  // namespace

SequenceSample regenerate(const SequenceInfo& info, const DatasetSpec& spec) {
  const World world = make_world(info.world_seed, world_kind_for(info.motion));
  const auto traj =
      sample_trajectory(info.motion, spec.trajectory_length, info.trajectory_seed);
  auto s = make_sequence(world, traj, spec.views, spec.stride, info.start,
                         info.intrinsics, spec.height, spec.width);
  if (!s) {
    throw InvalidArgumentError("sequence " + info.id +
                               " violates the 1.5 m step limit");
  }
  return std::move(*s);
}

Dataset generate_dataset(const DatasetSpec& spec) {
  const std::size_t span = (spec.views - 1) * spec.stride + 1;
  if (spec.views < 2) throw InvalidArgumentError("dataset views must be >= 2");
  if (spec.stride < 1) throw InvalidArgumentError("dataset stride must be >= 1");
  if (span > spec.trajectory_length) {
    throw InvalidArgumentError("trajectory_length " +
                               std::to_string(spec.trajectory_length) +
                               " is shorter than the sampled span " +
                               std::to_string(span));
  }
  const Intrinsics k = intrinsics_profile(spec.intrinsics, spec.height, spec.width);
  Dataset d;
  d.spec = spec;
  for (std::size_t i = 0; i < spec.sequences; ++i) {
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < kMaxAttempts && !accepted; ++attempt) {
      SequenceInfo info;
      info.id = sequence_id(i);
      info.motion = spec.motion;
      info.intrinsics = k;
      info.world_seed = derive(spec.seed, i, attempt, 1);
      info.trajectory_seed = derive(spec.seed, i, attempt, 2);
      std::mt19937_64 rng(derive(spec.seed, i, attempt, 3));
      info.start = std::uniform_int_distribution<std::size_t>(
          0, spec.trajectory_length - span)(rng);
      const World world = make_world(info.world_seed, world_kind_for(spec.motion));
      const auto traj = sample_trajectory(spec.motion, spec.trajectory_length,
                                          info.trajectory_seed);
      auto s = make_sequence(world, traj, spec.views, spec.stride, info.start, k,
                             spec.height, spec.width);
      if (!s) continue;
      d.samples.push_back(std::move(*s));
      d.info.push_back(info);
      accepted = true;
    }
    if (!accepted) {
      throw InvalidArgumentError("could not draw sequence " + std::to_string(i) +
                                 " within the 1.5 m step limit; reduce stride");
    }
  }
  return d;
}

}  // namespace vot::data
