#include "vot/head_loss.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "vot/errors.hpp"
#include "vot/layers.hpp"
#include "vot/numerics/ops.hpp"
#include "vot/numerics/svd3.hpp"

namespace vot::head {

using geometry::Mat3;
using geometry::Rotation;
using geometry::Vec3;
using numerics::Tensor;
using DataPtr = std::shared_ptr<numerics::TensorData>;

std::string to_string(Representation r) {
  switch (r) {
    case Representation::kRotationMatrix:
      return "rotation_matrix";
    case Representation::kQuaternion:
      return "quaternion";
    case Representation::kEuler:
      return "euler";
  }
  return "?";
}

Representation representation_from_string(const std::string& s) {
  if (s == "rotation_matrix") return Representation::kRotationMatrix;
  if (s == "quaternion") return Representation::kQuaternion;
  if (s == "euler") return Representation::kEuler;
  throw ConfigError("unknown rotation representation '" + s +
                    "' (expected rotation_matrix, quaternion or euler)");
}

std::size_t rotation_width(Representation r) {
  switch (r) {
    case Representation::kRotationMatrix:
      return 9;
    case Representation::kQuaternion:
      return 4;
    case Representation::kEuler:
      return 3;
  }
  return 0;
}

HeadParams HeadParams::init(std::size_t hidden_dim, Representation rep,
                            std::mt19937_64& rng) {
  const std::size_t width = output_width(rep);
  HeadParams h;
  h.representation = rep;
  h.weight = layers::gaussian({hidden_dim, width},
                              0.1 / std::sqrt(static_cast<double>(hidden_dim)),
                              rng, true);
  std::vector<double> b(width, 0.0);
  if (rep == Representation::kRotationMatrix) {
    b[0] = b[4] = b[8] = 1.0;
  } else if (rep == Representation::kQuaternion) {
    b[0] = 1.0;
  }
  h.bias = Tensor({width}, std::move(b), true);
  return h;
}

std::vector<encoder::NamedTensor> HeadParams::named() const {
  return {{"head.weight", weight}, {"head.bias", bias}};
}

void LossConfig::validate() const {
  if (!(rotation_weight > 0.0) || !(translation_weight > 0.0)) {
    throw ConfigError("loss weights lambda and gamma must both be positive");
  }
}

Tensor head_forward(const Tensor& camera_states, const HeadParams& head) {
  if (camera_states.rank() != 2 || camera_states.dim(0) < 2) {
    throw ShapeError("head: need camera states [T >= 2, d], got " +
                     numerics::shape_str(camera_states.shape()));
  }
  const std::size_t t = camera_states.dim(0);
  const Tensor later = numerics::slice(camera_states, 0, 1, t - 1);
  return numerics::linear(later, head.weight, &head.bias);
}

namespace {

Mat3 row_matrix(const double* p) {
  Mat3 m;
  m << p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8];
  return m;
}

void store_row_matrix(const Mat3& m, double* p) {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p[3 * r + c] = m(r, c);
  }
}

struct ProcrustesCache {
  Mat3 u, v;
  Vec3 signed_sv;  // singular values with the det correction folded in
  double det_sign = 1.0;
};

Tensor procrustes_rows(const Tensor& raw) {
  const std::size_t n = raw.dim(0);
  auto cache = std::make_shared<std::vector<ProcrustesCache>>(n);
  std::vector<double> out(n * 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Mat3 m = row_matrix(raw.values().data() + 9 * i);
    if (!m.allFinite()) {
      throw InvalidArgumentError("procrustes: non-finite values in row " +
                                 std::to_string(i));
    }
    const auto svd = numerics::svd3(m);
    if (svd.singular_values[1] < geometry::kProcrustesRankTolerance) {
      throw DegenerateInputError("procrustes: row " + std::to_string(i) +
                                 " has rank < 2");
    }
    auto& c = (*cache)[i];
    c.u = svd.u;
    c.v = svd.v;
    c.det_sign = (svd.u * svd.v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    c.signed_sv = svd.singular_values;
    c.signed_sv[2] *= c.det_sign;
    const Mat3 d = Vec3(1.0, 1.0, c.det_sign).asDiagonal();
    store_row_matrix(svd.u * d * svd.v.transpose(), out.data() + 9 * i);
  }
  Tensor y({n, 9}, std::move(out));
  if (numerics::needs_recording({&raw})) {
    DataPtr xd = raw.impl(), yd = y.impl();
    numerics::Tape::current()->record("procrustes", {xd}, yd, [=] {
      // With M = R P (P symmetric), dR = R V W Vᵀ where W is skew with
      // W_ij = (B_ij - B_ji) / (s_i + s_j), B = D Uᵀ dM V. Pulling a
      // gradient G back gives U D K Vᵀ, K_ij = (C_ij - C_ji) / (s_i + s_j),
      // C = Vᵀ Rᵀ G V.
      for (std::size_t i = 0; i < n; ++i) {
        const auto& c = (*cache)[i];
        const Mat3 d = Vec3(1.0, 1.0, c.det_sign).asDiagonal();
        const Mat3 r = c.u * d * c.v.transpose();
        const Mat3 g = row_matrix(yd->grad.data() + 9 * i);
        const Mat3 cm = c.v.transpose() * r.transpose() * g * c.v;
        Mat3 k = Mat3::Zero();
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) {
            if (a == b) continue;
            double s = c.signed_sv[a] + c.signed_sv[b];
            if (std::abs(s) < 1e-12) s = s < 0.0 ? -1e-12 : 1e-12;
            k(a, b) = (cm(a, b) - cm(b, a)) / s;
          }
        }
        const Mat3 dm = c.u * d * k * c.v.transpose();
        double* dst = xd->grad.data() + 9 * i;
        for (int r2 = 0; r2 < 3; ++r2) {
          for (int c2 = 0; c2 < 3; ++c2) dst[3 * r2 + c2] += dm(r2, c2);
        }
      }
    });
  }
  return y;
}

Tensor quaternion_rows(const Tensor& raw) {
  const std::size_t n = raw.dim(0);
  std::vector<double> out(n * 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double* q = raw.values().data() + 4 * i;
    const auto conv = geometry::quat_to_rot({q[0], q[1], q[2], q[3]});
    store_row_matrix(conv.rotation.matrix(), out.data() + 9 * i);
  }
  Tensor y({n, 9}, std::move(out));
  if (numerics::needs_recording({&raw})) {
    DataPtr xd = raw.impl(), yd = y.impl();
    numerics::Tape::current()->record("quaternion_to_matrix", {xd}, yd, [=] {
      for (std::size_t i = 0; i < n; ++i) {
        const double* q = xd->value.data() + 4 * i;
        const double nq = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] +
                                    q[3] * q[3]);
        const double w = q[0] / nq, x = q[1] / nq, y2 = q[2] / nq, z = q[3] / nq;
        const double* g = yd->grad.data() + 9 * i;
        // g laid out row-major: g[3r + c] = dL/dR_rc
        const double gw = 2.0 * (-z * g[1] + y2 * g[2] + z * g[3] - x * g[5] -
                                 y2 * g[6] + x * g[7]);
        const double gx = 2.0 * (y2 * g[1] + z * g[2] + y2 * g[3] - 2.0 * x * g[4] -
                                 w * g[5] + z * g[6] + w * g[7] - 2.0 * x * g[8]);
        const double gy = 2.0 * (-2.0 * y2 * g[0] + x * g[1] + w * g[2] + x * g[3] +
                                 z * g[5] - w * g[6] + z * g[7] - 2.0 * y2 * g[8]);
        const double gz = 2.0 * (-2.0 * z * g[0] - w * g[1] + x * g[2] + w * g[3] -
                                 2.0 * z * g[4] + y2 * g[5] + x * g[6] + y2 * g[7]);
        const double dot = w * gw + x * gx + y2 * gy + z * gz;
        double* dst = xd->grad.data() + 4 * i;
        dst[0] += (gw - w * dot) / nq;
        dst[1] += (gx - x * dot) / nq;
        dst[2] += (gy - y2 * dot) / nq;
        dst[3] += (gz - z * dot) / nq;
      }
    });
  }
  return y;
}

Mat3 rz(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}
Mat3 ry(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
Mat3 rx(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}
Mat3 drz(double a) {
  Mat3 m;
  m << -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a), 0, 0, 0, 0;
  return m;
}
Mat3 dry(double a) {
  Mat3 m;
  m << -std::sin(a), 0, std::cos(a), 0, 0, 0, -std::cos(a), 0, -std::sin(a);
  return m;
}
Mat3 drx(double a) {
  Mat3 m;
  m << 0, 0, 0, 0, -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a);
  return m;
}

Tensor euler_rows(const Tensor& raw) {
  const std::size_t n = raw.dim(0);
  std::vector<double> out(n * 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double* e = raw.values().data() + 3 * i;
    store_row_matrix(rz(e[0]) * ry(e[1]) * rx(e[2]), out.data() + 9 * i);
  }
  Tensor y({n, 9}, std::move(out));
  if (numerics::needs_recording({&raw})) {
    DataPtr xd = raw.impl(), yd = y.impl();
    numerics::Tape::current()->record("euler_to_matrix", {xd}, yd, [=] {
      for (std::size_t i = 0; i < n; ++i) {
        const double* e = xd->value.data() + 3 * i;
        const Mat3 g = row_matrix(yd->grad.data() + 9 * i);
        double* dst = xd->grad.data() + 3 * i;
        dst[0] += g.cwiseProduct(drz(e[0]) * ry(e[1]) * rx(e[2])).sum();
        dst[1] += g.cwiseProduct(rz(e[0]) * dry(e[1]) * rx(e[2])).sum();
        dst[2] += g.cwiseProduct(rz(e[0]) * ry(e[1]) * drx(e[2])).sum();
      }
    });
  }
  return y;
}

}  // namespace

Tensor rotation_from_raw(const Tensor& raw, Representation rep) {
  if (raw.rank() != 2 || raw.dim(1) != rotation_width(rep)) {
    throw ShapeError("rotation_from_raw: expected [N, " +
                     std::to_string(rotation_width(rep)) + "] for " +
                     to_string(rep) + ", got " +
                     numerics::shape_str(raw.shape()));
  }
  switch (rep) {
    case Representation::kRotationMatrix:
      return procrustes_rows(raw);
    case Representation::kQuaternion:
      return quaternion_rows(raw);
    case Representation::kEuler:
      return euler_rows(raw);
  }
  throw InvalidArgumentError("unknown representation");
}

std::vector<geometry::Pose> poses_from_raw(const Tensor& raw,
                                           Representation rep) {
  const std::size_t width = output_width(rep);
  if (raw.rank() != 2 || raw.dim(1) != width) {
    throw ShapeError("poses_from_raw: expected [N, " + std::to_string(width) +
                     "], got " + numerics::shape_str(raw.shape()));
  }
  std::vector<geometry::Pose> poses;
  const std::size_t rw = rotation_width(rep);
  for (std::size_t i = 0; i < raw.dim(0); ++i) {
    const double* p = raw.values().data() + width * i;
    geometry::Pose pose;
    try {
      switch (rep) {
        case Representation::kRotationMatrix:
          pose.rotation = geometry::procrustes_project(row_matrix(p));
          break;
        case Representation::kQuaternion:
          pose.rotation = geometry::quat_to_rot({p[0], p[1], p[2], p[3]}).rotation;
          break;
        case Representation::kEuler:
          pose.rotation = geometry::euler_to_rot({p[0], p[1], p[2]});
          break;
      }
    } catch (const DegenerateInputError& e) {
      throw DegenerateInputError("prediction for frame " +
                                 std::to_string(i + 1) + ": " + e.what());
    }
    pose.translation = Vec3(p[rw], p[rw + 1], p[rw + 2]);
    poses.push_back(pose);
  }
  return poses;
}

std::vector<geometry::Pose> predict_poses(const Tensor& camera_states,
                                          const HeadParams& head) {
  numerics::NoGradGuard no_grad;
  return poses_from_raw(head_forward(camera_states, head), head.representation);
}

Tensor rotation_loss(const Tensor& predicted, std::span<const Rotation> truth) {
  if (predicted.rank() != 2 || predicted.dim(1) != 9 ||
      predicted.dim(0) != truth.size() || truth.empty()) {
    throw ShapeError("rotation_loss: predictions " +
                     numerics::shape_str(predicted.shape()) + " vs " +
                     std::to_string(truth.size()) + " ground-truth rotations");
  }
  const std::size_t n = truth.size();
  // Per row: d(angle)/dR, computed alongside the angle.
  auto grads = std::make_shared<std::vector<Mat3>>(n);
  double total = 0.0;
  constexpr double limit = 1.0 - kArccosClip;
  for (std::size_t i = 0; i < n; ++i) {
    const Mat3 r = row_matrix(predicted.values().data() + 9 * i);
    const Mat3& g = truth[i].matrix();
    const double c = ((g.transpose() * r).trace() - 1.0) / 2.0;
    if (c > 0.0) {
      // Below π/2 the same angle is 2 asin(‖R - G‖_F / (2√2)), which keeps
      // full precision near zero.
      const Mat3 d = r - g;
      const double x = d.norm();
      total += 2.0 * std::asin(std::min(1.0, x / (2.0 * std::sqrt(2.0))));
      (*grads)[i] = x > 0.0 ? Mat3(d / (x * std::sqrt(std::max(2.0 - x * x / 4.0, 1.0))))
                            : Mat3::Zero();
    } else {
      total += std::acos(std::max(c, -1.0));
      const double cc = std::max(c, -limit);
      (*grads)[i] = (-0.5 / std::sqrt(1.0 - cc * cc)) * g;
    }
  }
  Tensor y = Tensor::scalar(total / static_cast<double>(n));
  if (numerics::needs_recording({&predicted})) {
    DataPtr xd = predicted.impl(), yd = y.impl();
    numerics::Tape::current()->record("geodesic_loss", {xd}, yd, [=] {
      const double scale = yd->grad[0] / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        double* dst = xd->grad.data() + 9 * i;
        for (int r = 0; r < 3; ++r) {
          for (int col = 0; col < 3; ++col) dst[3 * r + col] += scale * (*grads)[i](r, col);
        }
      }
    });
  }
  return y;
}

Tensor translation_loss(const Tensor& predicted, std::span<const Vec3> truth) {
  if (predicted.rank() != 2 || predicted.dim(1) != 3 ||
      predicted.dim(0) != truth.size() || truth.empty()) {
    throw ShapeError("translation_loss: predictions " +
                     numerics::shape_str(predicted.shape()) + " vs " +
                     std::to_string(truth.size()) + " ground-truth translations");
  }
  std::vector<double> t;
  t.reserve(3 * truth.size());
  for (const auto& v : truth) t.insert(t.end(), {v.x(), v.y(), v.z()});
  const Tensor target({truth.size(), 3}, std::move(t));
  return numerics::scale(numerics::sum(numerics::abs(numerics::sub(predicted, target))),
                         1.0 / static_cast<double>(truth.size()));
}

Tensor total_loss(const Tensor& rotation, const Tensor& translation,
                  const LossConfig& config) {
  config.validate();
  return numerics::add(numerics::scale(rotation, config.rotation_weight),
                       numerics::scale(translation, config.translation_weight));
}

double rotation_loss(std::span<const Rotation> truth,
                     std::span<const Rotation> predicted) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw InvalidArgumentError("rotation_loss: mismatched or empty inputs");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    total += geometry::geodesic_angle(truth[i], predicted[i]);
  }
  return total / static_cast<double>(truth.size());
}

double translation_loss(std::span<const Vec3> truth,
                        std::span<const Vec3> predicted) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw InvalidArgumentError("translation_loss: mismatched or empty inputs");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    total += (truth[i] - predicted[i]).cwiseAbs().sum();
  }
  return total / static_cast<double>(truth.size());
}

}  // namespace vot::head
