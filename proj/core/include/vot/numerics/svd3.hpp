#pragma once

#include <Eigen/Core>

namespace vot::numerics {

struct Svd3 {
  Eigen::Matrix3d u;
  Eigen::Vector3d singular_values;  // descending, non-negative
  Eigen::Matrix3d v;
};

/// Singular value decomposition m = U diag(s) Vᵀ of a 3x3 matrix.
///
/// V and the squared singular values come from a cyclic Jacobi
/// eigendecomposition of mᵀm (at most 100 sweeps, stopping once the
/// off-diagonal mass drops below 1e-14 of the matrix norm). U is rebuilt
/// column by column from m·V and completed with a cross product, so it stays
/// orthonormal even when m is rank deficient.
Svd3 svd3(const Eigen::Matrix3d& m);

}  // namespace vot::numerics
