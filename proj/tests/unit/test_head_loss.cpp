#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "support/gradcheck.hpp"
#include "vot/errors.hpp"
#include "vot/head_loss.hpp"
#include "vot/numerics/ops.hpp"

using namespace vot;
using namespace vot::head;
using geometry::Mat3;
using geometry::Rotation;
using geometry::Vec3;
using numerics::Tensor;

namespace {

constexpr double kPi = std::numbers::pi;

Tensor random_tensor(numerics::Shape shape, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  std::vector<double> v(numerics::shape_numel(shape));
  for (auto& x : v) x = n(rng);
  return Tensor(std::move(shape), std::move(v));
}

Tensor rotation_rows(const std::vector<Rotation>& rs) {
  std::vector<double> v;
  for (const auto& r : rs) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) v.push_back(r.matrix()(i, j));
    }
  }
  return Tensor({rs.size(), 9}, v);
}

std::vector<Rotation> random_rotations(std::size_t n, std::mt19937_64& rng, double max) {
  std::vector<Rotation> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(geometry::random_rotation(rng, max));
  return out;
}

}  // namespace

TEST(Representation, WidthsAndNames) {
  EXPECT_EQ(output_width(Representation::kRotationMatrix), 12u);
  EXPECT_EQ(output_width(Representation::kQuaternion), 7u);
  EXPECT_EQ(output_width(Representation::kEuler), 6u);
  for (auto r : {Representation::kRotationMatrix, Representation::kQuaternion,
                 Representation::kEuler}) {
    EXPECT_EQ(representation_from_string(to_string(r)), r);
  }
  EXPECT_THROW(representation_from_string("plucker"), ConfigError);
}

TEST(PredictPoses, OnePosePerLaterFrame) {
  std::mt19937_64 rng(1);
  for (std::size_t t = 2; t <= 6; ++t) {
    const auto h = HeadParams::init(8, Representation::kRotationMatrix, rng);
    EXPECT_EQ(predict_poses(random_tensor({t, 8}, rng), h).size(), t - 1);
  }
  const auto h = HeadParams::init(8, Representation::kRotationMatrix, rng);
  EXPECT_THROW(predict_poses(random_tensor({1, 8}, rng), h), ShapeError);
}

TEST(PredictPoses, UsesStatesOfLaterFrames) {
  std::mt19937_64 rng(2);
  auto h = HeadParams::init(4, Representation::kRotationMatrix, rng);
  Tensor states = random_tensor({3, 4}, rng);
  const auto a = predict_poses(states, h);
  for (std::size_t j = 0; j < 4; ++j) states.values()[j] += 10.0;  // frame 1 only
  const auto b = predict_poses(states, h);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ((a[k].translation - b[k].translation).norm(), 0.0);
  }
}

TEST(PredictPoses, ValidRotationOutputIsFixedPoint) {
  std::mt19937_64 rng(3);
  const auto rs = random_rotations(5, rng, kPi);
  Tensor raw = Tensor::zeros({5, 12});
  const Tensor rot = rotation_rows(rs);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 9; ++j) raw.values()[i * 12 + j] = rot[i * 9 + j];
    raw.values()[i * 12 + 9] = static_cast<double>(i);
  }
  const auto poses = poses_from_raw(raw, Representation::kRotationMatrix);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_LT((poses[i].rotation.matrix() - rs[i].matrix()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(poses[i].translation.x(), static_cast<double>(i));
  }
}

TEST(PredictPoses, RandomStatesGiveValidRotations) {
  std::mt19937_64 rng(4);
  for (auto rep : {Representation::kRotationMatrix, Representation::kQuaternion,
                   Representation::kEuler}) {
    for (int trial = 0; trial < 50; ++trial) {
      auto h = HeadParams::init(8, rep, rng);
      h.weight = random_tensor(h.weight.shape(), rng);
      for (const auto& p : predict_poses(random_tensor({4, 8}, rng), h)) {
        const Mat3& r = p.rotation.matrix();
        EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
      }
    }
  }
}

TEST(PredictPoses, DegenerateRowNamesFrame) {
  Tensor raw = Tensor::zeros({3, 12});
  for (std::size_t i : {0u, 2u}) {
    raw.values()[i * 12 + 0] = raw.values()[i * 12 + 4] = raw.values()[i * 12 + 8] = 1.0;
  }
  try {
    (void)poses_from_raw(raw, Representation::kRotationMatrix);
    FAIL();
  } catch (const DegenerateInputError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 2"), std::string::npos) << e.what();
  }
}

TEST(HeadInit, StartsAtNoMotion) {
  std::mt19937_64 rng(5);
  for (auto rep : {Representation::kRotationMatrix, Representation::kQuaternion,
                   Representation::kEuler}) {
    auto h = HeadParams::init(8, rep, rng);
    std::fill(h.weight.values().begin(), h.weight.values().end(), 0.0);
    for (const auto& p : predict_poses(random_tensor({3, 8}, rng), h)) {
      EXPECT_LT((p.rotation.matrix() - Mat3::Identity()).norm(), 1e-12);
      EXPECT_EQ(p.translation.norm(), 0.0);
    }
  }
}

TEST(RotationLoss, Examples) {
  std::mt19937_64 rng(6);
  const auto rs = random_rotations(4, rng, kPi);
  EXPECT_EQ(rotation_loss(rotation_rows(rs), rs).item(), 0.0);
  const Vec3 axis = Vec3(1, -2, 0.5).normalized();
  std::vector<Rotation> moved;
  for (const auto& r : rs) moved.push_back(r * Rotation::about_axis(axis, 0.7));
  EXPECT_NEAR(rotation_loss(rotation_rows(moved), rs).item(), 0.7, 1e-9);
  // Two pairs with angles 0.2 and 0.4 average to 0.3.
  const std::vector<Rotation> truth{Rotation(), Rotation()};
  const std::vector<Rotation> pred{Rotation::about_axis(Vec3::UnitX(), 0.2),
                                   Rotation::about_axis(Vec3::UnitY(), 0.4)};
  EXPECT_NEAR(rotation_loss(rotation_rows(pred), truth).item(), 0.3, 1e-12);
  EXPECT_NEAR(rotation_loss(truth, pred), 0.3, 1e-12);
}

TEST(RotationLoss, PreciseAtSmallAngles) {
  std::mt19937_64 rng(8);
  const auto rs = random_rotations(3, rng, kPi);
  for (double angle : {1e-9, 1e-6, 1e-3}) {
    std::vector<Rotation> moved;
    for (const auto& r : rs) moved.push_back(r * Rotation::about_axis(Vec3::UnitZ(), angle));
    EXPECT_NEAR(rotation_loss(rotation_rows(moved), rs).item(), angle, 1e-6 * angle);
  }
}

TEST(RotationLoss, GradientOnBothSidesOfRightAngle) {
  // Angles on either side of π/2 exercise both evaluation branches.
  for (double angle : {1.2, 1.9, 2.8}) {
    const std::vector<Rotation> truth{Rotation::about_axis(Vec3(1, 2, 3).normalized(), 0.4)};
    const Rotation pred = truth[0] * Rotation::about_axis(Vec3(-1, 0.5, 2).normalized(), angle);
    Tensor raw = rotation_rows({pred});
    EXPECT_NEAR(rotation_loss(raw, truth).item(), angle, 1e-12);
    const auto r = vot::testing::check_gradients(
        [&] { return rotation_loss(rotation_from_raw(raw, Representation::kRotationMatrix), truth); },
        {{"raw", raw}});
    EXPECT_LT(r.max_rel_error, 1e-4) << angle << " " << r.worst;
  }
}

TEST(RotationLoss, WithinRange) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_rotations(3, rng, kPi), b = random_rotations(3, rng, kPi);
    const double l = rotation_loss(a, b);
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, kPi);
  }
}

TEST(TranslationLoss, Examples) {
  const std::vector<Vec3> zero{Vec3::Zero()}, t{Vec3(1, -2, 0.5)};
  EXPECT_EQ(translation_loss(t, t), 0.0);
  EXPECT_DOUBLE_EQ(translation_loss(zero, t), 3.5);
  EXPECT_DOUBLE_EQ(translation_loss(Tensor({1, 3}, {1, -2, 0.5}), zero).item(), 3.5);
  const std::vector<Vec3> a{Vec3(0.3, 1, -2), Vec3(4, 0, 1)}, b{Vec3(1, 1, 1), Vec3(0, 0, 0)};
  std::vector<Vec3> ca, cb;
  for (std::size_t i = 0; i < 2; ++i) {
    ca.push_back(-2.5 * a[i]);
    cb.push_back(-2.5 * b[i]);
  }
  EXPECT_NEAR(translation_loss(ca, cb), 2.5 * translation_loss(a, b), 1e-12);
}

TEST(TotalLoss, ExamplesAndGradientSplit) {
  EXPECT_DOUBLE_EQ(total_loss(1.0, 1.0, LossConfig{1.0, 1.0}), 2.0);
  EXPECT_DOUBLE_EQ(total_loss(0.5, 2.0, LossConfig{2.0, 0.25}), 1.5);
  Tensor r = Tensor::scalar(0.5), t = Tensor::scalar(2.0);
  r.set_requires_grad(true);
  t.set_requires_grad(true);
  numerics::Tape tape;
  tape.backward(total_loss(r, t, LossConfig{2.0, 0.25}));
  EXPECT_DOUBLE_EQ(r.grad()[0], 2.0);
  EXPECT_DOUBLE_EQ(t.grad()[0], 0.25);
  EXPECT_THROW((LossConfig{0.0, 1.0}).validate(), ConfigError);
  EXPECT_THROW((LossConfig{1.0, -1.0}).validate(), ConfigError);
}

TEST(TotalLoss, ZeroOnlyWhenBothZero) {
  const LossConfig c;
  EXPECT_EQ(total_loss(0.0, 0.0, c), 0.0);
  EXPECT_GT(total_loss(1e-9, 0.0, c), 0.0);
  EXPECT_GT(total_loss(0.0, 1e-9, c), 0.0);
}

TEST(RotationBranch, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(8);
  for (auto rep : {Representation::kRotationMatrix, Representation::kQuaternion,
                   Representation::kEuler}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto truth = random_rotations(3, rng, 2.5);
      Tensor raw = random_tensor({3, rotation_width(rep)}, rng);
      const auto r = vot::testing::check_gradients(
          [&] { return rotation_loss(rotation_from_raw(raw, rep), truth); }, {{"raw", raw}});
      EXPECT_LT(r.max_rel_error, 1e-4) << to_string(rep) << " " << r.worst;
    }
  }
}

TEST(RotationBranch, ProcrustesGradientNearConvergence) {
  // Raw outputs close to SO(3), as late in training.
  std::mt19937_64 rng(9);
  const auto truth = random_rotations(4, rng, kPi);
  std::vector<Rotation> near;
  for (const auto& r : truth) near.push_back(r * geometry::random_rotation(rng, 0.05));
  Tensor raw = numerics::add(rotation_rows(near), random_tensor({4, 9}, rng, 0.01));
  const auto r = vot::testing::check_gradients(
      [&] { return rotation_loss(rotation_from_raw(raw, Representation::kRotationMatrix), truth); },
      {{"raw", raw}});
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(HeadForward, FullPathGradients) {
  std::mt19937_64 rng(10);
  auto h = HeadParams::init(6, Representation::kRotationMatrix, rng);
  Tensor states = random_tensor({4, 6}, rng);
  const auto truth = random_rotations(3, rng, 1.0);
  const std::vector<Vec3> t{Vec3(0.1, 0.2, 0.3), Vec3(-0.5, 0.0, 0.4), Vec3(1, 1, 1)};
  const auto r = vot::testing::check_gradients(
      [&] {
        const Tensor raw = head_forward(states, h);
        const Tensor rot = rotation_loss(
            rotation_from_raw(numerics::slice(raw, 1, 0, 9), Representation::kRotationMatrix),
            truth);
        const Tensor trans = translation_loss(numerics::slice(raw, 1, 9, 3), t);
        return total_loss(rot, trans, LossConfig{});
      },
      {{"states", states}, {"weight", h.weight}, {"bias", h.bias}});
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}
