#include <algorithm>
#include <cmath>
#include <random>

#include "vot/data.hpp"
#include "vot/errors.hpp"

namespace vot::data {

using geometry::Pose;
using geometry::Rotation;
using geometry::Vec3;

std::string to_string(MotionKind k) {
  return k == MotionKind::kIndoorWander ? "indoor_wander" : "forward_dominant";
}

MotionKind motion_kind_from_string(const std::string& s) {
  if (s == "indoor_wander") return MotionKind::kIndoorWander;
  if (s == "forward_dominant") return MotionKind::kForwardDominant;
  throw InvalidArgumentError("unknown motion kind '" + s +
                             "' (expected indoor_wander or forward_dominant)");
}

WorldKind world_kind_for(MotionKind k) {
  return k == MotionKind::kIndoorWander ? WorldKind::kRoom : WorldKind::kStreet;
}

namespace {

Vec3 clamp_norm(const Vec3& v, double max_norm) {
  const double n = v.norm();
  return n > max_norm ? Vec3(v * (max_norm / n)) : v;
}

Rotation exp_so3(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-15) return Rotation::identity();
  return Rotation::about_axis(w, angle);
}

std::vector<Pose> indoor_wander(std::size_t length, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  // Body-frame angular rate weights: pitch (x), yaw (y), roll (z).
  const Vec3 axis_weight(0.6, 1.0, 0.3);
  Vec3 velocity = clamp_norm(Vec3(n(rng), 0.3 * n(rng), n(rng)) * 0.05,
                             kIndoorMaxStepTranslation);
  Vec3 omega = clamp_norm(axis_weight.cwiseProduct(Vec3(n(rng), n(rng), n(rng))) * 0.03,
                          0.999 * kIndoorMaxStepAngle);
  std::vector<Pose> poses{Pose::identity()};
  while (poses.size() < length) {
    const Pose& prev = poses.back();
    Pose next;
    next.rotation = prev.rotation * exp_so3(omega);
    next.translation = prev.translation + velocity;
    poses.push_back(next);

    const Vec3 pull = -0.03 * next.translation;
    velocity = clamp_norm(0.85 * velocity + pull +
                              0.02 * Vec3(n(rng), 0.4 * n(rng), n(rng)),
                          kIndoorMaxStepTranslation);
    omega = clamp_norm(0.85 * omega + 0.012 * axis_weight.cwiseProduct(
                                                 Vec3(n(rng), n(rng), n(rng))),
                       0.999 * kIndoorMaxStepAngle);
  }
  return poses;
}

std::vector<Pose> forward_dominant(std::size_t length, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.7, 1.3);
  const double max_yaw_rate = 2.0 * 3.14159265358979323846 / 180.0;
  double speed = u(rng);
  double yaw_rate = 0.0;
  double lateral = 0.0;
  std::vector<Pose> poses{Pose::identity()};
  while (poses.size() < length) {
    const Pose& prev = poses.back();
    Pose step;
    step.rotation = Rotation::about_axis(Vec3::UnitY(), yaw_rate);
    step.translation = Vec3(lateral, 0.0, speed);
    poses.push_back(prev * step);

    speed = std::clamp(speed + 0.05 * n(rng), 0.5, 1.5);
    yaw_rate = std::clamp(0.9 * yaw_rate + 0.004 * n(rng), -max_yaw_rate,
                          max_yaw_rate);
    // Steer back toward the street centre line.
    yaw_rate -= 0.002 * poses.back().translation.x();
    yaw_rate = std::clamp(yaw_rate, -max_yaw_rate, max_yaw_rate);
    lateral = std::clamp(0.8 * lateral + 0.01 * n(rng), -0.05, 0.05);
  }
  return poses;
}

}  // namespace

std::vector<Pose> sample_trajectory(MotionKind kind, std::size_t length,
                                    std::uint64_t seed) {
  if (length == 0) throw InvalidArgumentError("trajectory length must be >= 1");
  std::mt19937_64 rng(seed);
  return kind == MotionKind::kIndoorWander ? indoor_wander(length, rng)
                                           : forward_dominant(length, rng);
}

}  // namespace vot::data
