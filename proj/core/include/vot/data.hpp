#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vot/geometry.hpp"
#include "vot/image.hpp"

namespace vot::data {

/// Pinhole intrinsics in pixels: u = fx*x/z + cx, v = fy*y/z + cy. Pixel
/// (row r, column c) is centred at (u, v) = (c, r).
struct Intrinsics {
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
};

/// Named calibration families. "default" is fx = fy = W with the principal
/// point at the image centre; "wide" and "narrow" scale the focal length by
/// 0.7 and 1.4; "offset" shifts the principal point by W/16 and H/16.
Intrinsics intrinsics_profile(const std::string& name, std::size_t height,
                              std::size_t width);
std::vector<std::string> intrinsics_profile_names();

struct WorldPoint {
  geometry::Vec3 position;
  double intensity = 1.0;  // [0, 1]
  double radius = 1.0;     // Gaussian sigma in pixels at unit depth
};

enum class WorldKind { kRoom, kStreet };

struct World {
  std::vector<WorldPoint> points;
  double background = 0.1;
  std::uint64_t seed = 0;
  WorldKind kind = WorldKind::kRoom;
};

inline constexpr std::size_t kMinWorldPoints = 50;

/// Random textured room (points on the walls of an 8 m box plus clutter that
/// keeps 1.5 m clear of the origin) or street (two facades and a floor along
/// +z). Throws vot::InvalidArgumentError if fewer than 50 points would land
/// in the working volume.
World make_world(std::uint64_t seed, WorldKind kind = WorldKind::kRoom);

/// Gaussian-splat rendering, single channel. Points with camera-frame depth
/// <= 0.05 m are culled; each remaining point adds
/// intensity * exp(-r² / (2 sigma²)) with sigma = radius / depth, and the
/// result is clamped to [0, 1]. No occlusion handling.
Image render(const World& world, const geometry::Pose& camera,
             const Intrinsics& intrinsics, std::size_t height,
             std::size_t width);

inline constexpr double kCullDepth = 0.05;

enum class MotionKind { kIndoorWander, kForwardDominant };

std::string to_string(MotionKind k);
MotionKind motion_kind_from_string(const std::string& s);
WorldKind world_kind_for(MotionKind k);

/// Smooth random camera path starting at the identity.
///  * indoor_wander: damped random walk; every step rotates at most 5 deg and
///    translates at most 0.15 m.
///  * forward_dominant: body-frame forward speed in [0.5, 1.5] m per step
///    with small lateral drift and yaw.
std::vector<geometry::Pose> sample_trajectory(MotionKind kind,
                                              std::size_t length,
                                              std::uint64_t seed);

inline constexpr double kIndoorMaxStepAngle = 5.0 * 3.14159265358979323846 / 180.0;
inline constexpr double kIndoorMaxStepTranslation = 0.15;

struct SequenceSample {
  std::vector<Image> frames;
  std::vector<geometry::Pose> rel_poses_gt;  // T-1, consecutive
  std::vector<geometry::Pose> abs_poses_gt;  // T, world-from-camera
  std::vector<double> timestamps;
  Intrinsics intrinsics;
};

/// Consecutive sampled frames further apart than this are rejected.
inline constexpr double kMaxStepTranslation = 1.5;
inline constexpr double kFrameRate = 30.0;

/// Samples T frames at trajectory indices start, start+stride, ... and
/// renders them. Returns std::nullopt when any consecutive pair moves more
/// than 1.5 m (the caller draws again). Throws vot::InvalidArgumentError when
/// start + (T-1)*stride is past the end of the trajectory.
std::optional<SequenceSample> make_sequence(
    const World& world, const std::vector<geometry::Pose>& trajectory,
    std::size_t views, std::size_t stride, std::size_t start,
    const Intrinsics& intrinsics, std::size_t height, std::size_t width);

/// What to generate; everything is derived deterministically from `seed`.
struct DatasetSpec {
  MotionKind motion = MotionKind::kIndoorWander;
  std::size_t sequences = 10;
  std::size_t views = 4;
  std::size_t stride = 3;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t trajectory_length = 40;
  std::string intrinsics = "default";
  std::uint64_t seed = 1;
};

/// Provenance of one generated sequence.
struct SequenceInfo {
  std::string id;
  std::uint64_t world_seed = 0;
  std::uint64_t trajectory_seed = 0;
  std::size_t start = 0;
  MotionKind motion = MotionKind::kIndoorWander;
  Intrinsics intrinsics;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<SequenceSample> samples;
  std::vector<SequenceInfo> info;
};

/// Generates spec.sequences accepted samples. Sequence i uses its own world
/// and trajectory seeds derived from (spec.seed, i, attempt), so the result
/// does not depend on generation order.
Dataset generate_dataset(const DatasetSpec& spec);

/// Regenerates one sequence from its recorded provenance.
SequenceSample regenerate(const SequenceInfo& info, const DatasetSpec& spec);

}  // namespace vot::data
