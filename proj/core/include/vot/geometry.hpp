#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

/// Rigid-body algebra shared by every other module.
///
/// Conventions, used everywhere in the library:
///  * A Pose is world-from-camera: p_world = R * p_cam + t.
///  * Camera axes are x right, y down, z forward (optical axis).
///  * Relative poses are consecutive: rel_k maps frame k+1 into frame k, so
///    that abs[k+1] = abs[k] * rel_k (right composition).
///  * Euler angles are intrinsic Z-Y-X: R = Rz(yaw) * Ry(pitch) * Rx(roll).
///  * Quaternions are stored (w, x, y, z) with w >= 0.
namespace vot::geometry {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kRotationTolerance = 1e-9;

/// An element of SO(3).
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Throws vot::InvalidArgumentError unless mᵀm = I and det(m) = +1 within
  /// `tol`.
  static Rotation from_matrix(const Mat3& m, double tol = kRotationTolerance);
  /// Skips validation; for matrices that are rotations by construction.
  static Rotation from_matrix_unchecked(const Mat3& m) { return Rotation(m); }
  static Rotation about_axis(const Vec3& axis, double angle);
  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose()); }
  /// Rotation angle in [0, pi].
  double angle() const;

  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  static bool is_valid(const Mat3& m, double tol = kRotationTolerance);

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Pose operator*(const Pose& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }
  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
  Pose inverse() const;
};

inline Pose pose_inverse(const Pose& p) { return p.inverse(); }

/// Absolute world-from-camera poses with strictly increasing timestamps.
struct Trajectory {
  std::vector<Pose> poses;
  std::vector<double> timestamps;

  std::size_t size() const { return poses.size(); }
  /// Throws vot::InvalidArgumentError when the invariants do not hold.
  void validate() const;
};

/// Nearest rotation in Frobenius norm: U diag(1, 1, det(UVᵀ)) Vᵀ from the SVD
/// of `raw`. Throws vot::DegenerateInputError when the two smallest singular
/// values are both below 1e-12 and vot::InvalidArgumentError on non-finite
/// input.
Rotation procrustes_project(const Mat3& raw);

inline constexpr double kProcrustesRankTolerance = 1e-12;

/// arccos((tr(aᵀb) - 1) / 2) with the argument clamped to [-1, 1]. Below
/// π/2 it is evaluated as 2 asin(‖a - b‖_F / (2√2)), which is exact at 0.
double geodesic_angle(const Rotation& a, const Rotation& b);

/// poses[0] = start, poses[k+1] = poses[k] * rel[k]. Timestamps default to
/// the frame index.
Trajectory compose_relative(const Pose& start, std::span<const Pose> rel);
Trajectory compose_relative(const Pose& start, std::span<const Pose> rel,
                            std::span<const double> timestamps);

/// Inverse of compose_relative: rel[k] = poses[k]^-1 * poses[k+1].
std::vector<Pose> relative_poses(std::span<const Pose> poses);

struct Quaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;
  double norm() const;
};

/// Result of converting a possibly non-unit quaternion.
struct QuaternionConversion {
  Rotation rotation;
  /// |1 - ‖q‖|: how far the input was from unit length before normalizing.
  double norm_correction = 0.0;
};

Quaternion rot_to_quat(const Rotation& r);
/// Normalizes internally; throws vot::DegenerateInputError for a zero or
/// non-finite quaternion.
QuaternionConversion quat_to_rot(const Quaternion& q);

struct EulerZYX {
  double yaw = 0.0, pitch = 0.0, roll = 0.0;
};

struct EulerConversion {
  EulerZYX angles;
  /// Set when |pitch| is within 1e-7 of pi/2; roll is then reported as 0 and
  /// the remaining freedom is absorbed into yaw.
  bool gimbal_lock = false;
};

inline constexpr double kGimbalLockTolerance = 1e-7;

EulerConversion rot_to_euler(const Rotation& r);
Rotation euler_to_rot(const EulerZYX& e);

/// Axis uniform on the sphere, angle uniform in (0, max_angle].
Rotation random_rotation(std::uint64_t seed, double max_angle);
Rotation random_rotation(std::mt19937_64& rng, double max_angle);

Mat3 skew(const Vec3& v);

}  // namespace vot::geometry
