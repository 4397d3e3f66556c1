#include "vot/numerics/svd3.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace vot::numerics {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTol = 1e-14;

// Cyclic Jacobi on a symmetric matrix; `a` ends up (numerically) diagonal
// and `v` accumulates the rotations so that a_in = v diag(a) vᵀ.
void jacobi_eigen(Eigen::Matrix3d& a, Eigen::Matrix3d& v) {
  v.setIdentity();
  const double scale = std::max(a.norm(), 1e-300);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double off = std::sqrt(2.0 * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) +
                                        a(1, 2) * a(1, 2)));
    if (off <= kOffDiagonalTol * scale) return;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
        j(p, p) = c;
        j(q, q) = c;
        j(p, q) = s;
        j(q, p) = -s;
        a = j.transpose() * a * j;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        v = v * j;
      }
    }
  }
}

Eigen::Vector3d any_perpendicular(const Eigen::Vector3d& u) {
  Eigen::Index i = 0;
  u.cwiseAbs().minCoeff(&i);
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e[i] = 1.0;
  return (e - e.dot(u) * u).normalized();
}

}  // namespace

Svd3 svd3(const Eigen::Matrix3d& m) {
  Eigen::Matrix3d ata = m.transpose() * m;
  Eigen::Matrix3d v_raw;
  jacobi_eigen(ata, v_raw);

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return ata(i, i) > ata(j, j); });
  Eigen::Matrix3d v;
  for (int c = 0; c < 3; ++c) v.col(c) = v_raw.col(order[c]);

  Svd3 out;
  out.v = v;
  const Eigen::Vector3d mv0 = m * v.col(0);
  const Eigen::Vector3d mv1 = m * v.col(1);
  const Eigen::Vector3d mv2 = m * v.col(2);

  const double s0 = mv0.norm();
  if (s0 == 0.0) {
    out.u.setIdentity();
    out.singular_values.setZero();
    return out;
  }
  const Eigen::Vector3d u0 = mv0 / s0;

  Eigen::Vector3d w = mv1 - u0.dot(mv1) * u0;
  Eigen::Vector3d u1 = w.norm() > 1e-14 * s0 ? Eigen::Vector3d(w.normalized())
                                             : any_perpendicular(u0);
  Eigen::Vector3d u2 = u0.cross(u1);
  double s2 = u2.dot(mv2);
  if (s2 < 0.0) {
    u2 = -u2;
    s2 = -s2;
  }
  double s1 = std::max(0.0, u1.dot(mv1));

  out.u.col(0) = u0;
  out.u.col(1) = u1;
  out.u.col(2) = u2;
  out.singular_values = Eigen::Vector3d(s0, s1, s2);

  // Near-equal values can come out of Jacobi in the wrong order by an ulp.
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2 - i; ++j) {
      if (out.singular_values[j] < out.singular_values[j + 1]) {
        std::swap(out.singular_values[j], out.singular_values[j + 1]);
        out.u.col(j).swap(out.u.col(j + 1));
        out.v.col(j).swap(out.v.col(j + 1));
      }
    }
  }
  return out;
}

}  // namespace vot::numerics
