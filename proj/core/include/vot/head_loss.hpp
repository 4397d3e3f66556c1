#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "vot/encoder.hpp"
#include "vot/geometry.hpp"
#include "vot/numerics/tensor.hpp"

namespace vot::head {

enum class Representation { kRotationMatrix, kQuaternion, kEuler };

std::string to_string(Representation r);
/// Accepts "rotation_matrix", "quaternion" and "euler".
Representation representation_from_string(const std::string& s);

/// Raw rotation values per pose: 9, 4 or 3.
std::size_t rotation_width(Representation r);
/// rotation_width + 3 translation values.
inline std::size_t output_width(Representation r) { return rotation_width(r) + 3; }

/// A single linear map from a camera state to one relative pose. Output
/// columns hold the rotation values first, then the translation.
struct HeadParams {
  Representation representation = Representation::kRotationMatrix;
  numerics::Tensor weight;  // [d, output_width]
  numerics::Tensor bias;    // [output_width]

  /// Small random weights; the bias starts at the identity rotation and zero
  /// translation so the initial prediction is "no motion".
  static HeadParams init(std::size_t hidden_dim, Representation rep,
                         std::mt19937_64& rng);
  std::vector<encoder::NamedTensor> named() const;
};

struct LossConfig {
  double rotation_weight = 10.0;    // lambda
  double translation_weight = 1.0;  // gamma

  /// Throws vot::ConfigError unless both weights are positive.
  void validate() const;
};

/// Raw head outputs [T-1, output_width] from camera states [T, d]: the state
/// of frame k (k >= 1) predicts the relative pose from frame k-1 to k.
numerics::Tensor head_forward(const numerics::Tensor& camera_states,
                              const HeadParams& head);

/// Differentiable mapping of raw rotation values [N, rotation_width] to
/// row-major rotation matrices [N, 9].
///
/// The rotation-matrix representation applies the special orthogonal
/// Procrustes projection; its backward pass uses the analytic derivative of
/// the projection, built from the same SVD as the forward pass. Throws
/// vot::DegenerateInputError (naming the row) on rank-deficient input.
numerics::Tensor rotation_from_raw(const numerics::Tensor& raw,
                                   Representation rep);

/// Converts raw head outputs [T-1, output_width] into T-1 relative poses.
/// Procrustes failures are rethrown naming the frame index.
std::vector<geometry::Pose> predict_poses(const numerics::Tensor& camera_states,
                                          const HeadParams& head);
std::vector<geometry::Pose> poses_from_raw(const numerics::Tensor& raw,
                                           Representation rep);

/// Mean geodesic angle between predicted rotations [N, 9] and ground truth.
/// Angles below π/2 are evaluated as 2 asin(‖R - G‖_F / (2√2)); above, as
/// arccos with its derivative taken at an argument clipped to -(1 - 1e-7).
numerics::Tensor rotation_loss(const numerics::Tensor& predicted,
                               std::span<const geometry::Rotation> truth);
/// Mean over rows of ‖t - t̂‖₁ for translations [N, 3].
numerics::Tensor translation_loss(const numerics::Tensor& predicted,
                                  std::span<const geometry::Vec3> truth);
numerics::Tensor total_loss(const numerics::Tensor& rotation,
                            const numerics::Tensor& translation,
                            const LossConfig& config);

// Plain-value versions for evaluation and tests.
double rotation_loss(std::span<const geometry::Rotation> truth,
                     std::span<const geometry::Rotation> predicted);
double translation_loss(std::span<const geometry::Vec3> truth,
                        std::span<const geometry::Vec3> predicted);
inline double total_loss(double rotation, double translation,
                         const LossConfig& config) {
  return config.rotation_weight * rotation +
         config.translation_weight * translation;
}

inline constexpr double kArccosClip = 1e-7;

}  // namespace vot::head
