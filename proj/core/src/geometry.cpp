#include "vot/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vot/errors.hpp"
#include "vot/numerics/svd3.hpp"

namespace vot::geometry {

bool Rotation::is_valid(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  const Mat3 err = m.transpose() * m - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol &&
         std::abs(m.determinant() - 1.0) <= tol;
}

Rotation Rotation::from_matrix(const Mat3& m, double tol) {
  if (!is_valid(m, tol)) {
    throw InvalidArgumentError("matrix is not a rotation (RᵀR != I or det != 1)");
  }
  return Rotation(m);
}

Rotation Rotation::about_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle)) {
    throw InvalidArgumentError("rotation axis must be non-zero and finite");
  }
  return Rotation(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix());
}

double Rotation::angle() const { return geodesic_angle(Rotation(), *this); }

Pose Pose::inverse() const {
  const Rotation rinv = rotation.inverse();
  return {rinv, -(rinv * translation)};
}

void Trajectory::validate() const {
  if (poses.empty()) throw InvalidArgumentError("trajectory is empty");
  if (poses.size() != timestamps.size()) {
    throw InvalidArgumentError(
        "trajectory has " + std::to_string(poses.size()) + " poses but " +
        std::to_string(timestamps.size()) + " timestamps");
  }
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw InvalidArgumentError("timestamps not strictly increasing at index " +
                                 std::to_string(i));
    }
  }
}

Rotation procrustes_project(const Mat3& raw) {
  if (!raw.allFinite()) {
    throw InvalidArgumentError("procrustes_project: non-finite input");
  }
  const auto svd = numerics::svd3(raw);
  if (svd.singular_values[1] < kProcrustesRankTolerance) {
    throw DegenerateInputError(
        "procrustes_project: input has rank < 2 (singular values " +
        std::to_string(svd.singular_values[0]) + ", " +
        std::to_string(svd.singular_values[1]) + ", " +
        std::to_string(svd.singular_values[2]) + ")");
  }
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.u * svd.v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return Rotation::from_matrix_unchecked(svd.u * d * svd.v.transpose());
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
  const double c = std::clamp(((a.matrix().transpose() * b.matrix()).trace() - 1.0) / 2.0, -1.0, 1.0);
  if (c <= 0.0) return std::acos(c);
  // Same angle via ‖a - b‖_F = 2√2 sin(θ/2), exact near θ = 0.
  return 2.0 * std::asin(std::min(1.0, (a.matrix() - b.matrix()).norm() / (2.0 * std::sqrt(2.0))));
}

Trajectory compose_relative(const Pose& start, std::span<const Pose> rel) {
  std::vector<double> ts(rel.size() + 1);
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = static_cast<double>(i);
  return compose_relative(start, rel, ts);
}

Trajectory compose_relative(const Pose& start, std::span<const Pose> rel,
                            std::span<const double> timestamps) {
  if (timestamps.size() != rel.size() + 1) {
    throw InvalidArgumentError("compose_relative: need " +
                               std::to_string(rel.size() + 1) +
                               " timestamps, got " +
                               std::to_string(timestamps.size()));
  }
  Trajectory out;
  out.poses.reserve(rel.size() + 1);
  out.poses.push_back(start);
  for (const auto& r : rel) out.poses.push_back(out.poses.back() * r);
  out.timestamps.assign(timestamps.begin(), timestamps.end());
  return out;
}

std::vector<Pose> relative_poses(std::span<const Pose> poses) {
  std::vector<Pose> rel;
  for (std::size_t k = 1; k < poses.size(); ++k) {
    rel.push_back(poses[k - 1].inverse() * poses[k]);
  }
  return rel;
}

double Quaternion::norm() const {
  return std::sqrt(w * w + x * x + y * y + z * z);
}

Quaternion rot_to_quat(const Rotation& r) {
  Eigen::Quaterniond q(r.matrix());
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return {q.w(), q.x(), q.y(), q.z()};
}

QuaternionConversion quat_to_rot(const Quaternion& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DegenerateInputError("quat_to_rot: zero or non-finite quaternion");
  }
  const Eigen::Quaterniond unit(q.w / n, q.x / n, q.y / n, q.z / n);
  return {Rotation::from_matrix_unchecked(unit.toRotationMatrix()),
          std::abs(1.0 - n)};
}

EulerConversion rot_to_euler(const Rotation& r) {
  const Mat3& m = r.matrix();
  EulerConversion out;
  out.angles.pitch = std::atan2(-m(2, 0), std::hypot(m(0, 0), m(1, 0)));
  if (std::numbers::pi / 2 - std::abs(out.angles.pitch) < kGimbalLockTolerance) {
    out.gimbal_lock = true;
    out.angles.roll = 0.0;
    out.angles.yaw = std::atan2(-m(0, 1), m(1, 1));
  } else {
    out.angles.yaw = std::atan2(m(1, 0), m(0, 0));
    out.angles.roll = std::atan2(m(2, 1), m(2, 2));
  }
  return out;
}

Rotation euler_to_rot(const EulerZYX& e) {
  const Mat3 m = (Eigen::AngleAxisd(e.yaw, Vec3::UnitZ()) *
                  Eigen::AngleAxisd(e.pitch, Vec3::UnitY()) *
                  Eigen::AngleAxisd(e.roll, Vec3::UnitX()))
                     .toRotationMatrix();
  return Rotation::from_matrix_unchecked(m);
}

Rotation random_rotation(std::mt19937_64& rng, double max_angle) {
  if (!(max_angle > 0.0) || max_angle > std::numbers::pi) {
    throw InvalidArgumentError("random_rotation: max_angle must be in (0, pi]");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec3 axis;
  do {
    axis = Vec3(normal(rng), normal(rng), normal(rng));
  } while (axis.norm() < 1e-12);
  const double angle = max_angle * (1.0 - unit(rng));
  return Rotation::about_axis(axis, angle);
}

Rotation random_rotation(std::uint64_t seed, double max_angle) {
  std::mt19937_64 rng(seed);
  return random_rotation(rng, max_angle);
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

}  // namespace vot::geometry
