#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace phasetop {

using Vec2 = Eigen::Vector2d;

/// Linear map on deviatoric tensors, expressed in the orthonormal basis
/// e1 = diag(1,-1)/sqrt(2), e2 = offdiag(1,1)/sqrt(2).
using DevMap = Eigen::Matrix2d;

/// Linear map on symmetric tensors in Mandel coordinates (xx, yy, sqrt(2) xy).
using SymMap = Eigen::Matrix3d;

/// Symmetric trace-free 2x2 tensor [[xx, xy], [xy, -xx]].
struct DevTensor2 {
  double xx = 0.0;
  double xy = 0.0;

  static DevTensor2 fromCoords(const Eigen::Vector2d& c) {
    return {c[0] / std::sqrt(2.0), c[1] / std::sqrt(2.0)};
  }
  Eigen::Vector2d coords() const { return {std::sqrt(2.0) * xx, std::sqrt(2.0) * xy}; }

  double normSquared() const { return 2.0 * (xx * xx + xy * xy); }
  double norm() const { return std::sqrt(normSquared()); }
  double dot(const DevTensor2& o) const { return 2.0 * (xx * o.xx + xy * o.xy); }

  DevTensor2 operator+(const DevTensor2& o) const { return {xx + o.xx, xy + o.xy}; }
  DevTensor2 operator-(const DevTensor2& o) const { return {xx - o.xx, xy - o.xy}; }
  DevTensor2 operator*(double s) const { return {s * xx, s * xy}; }
  friend DevTensor2 operator*(double s, const DevTensor2& q) { return q * s; }
  bool operator==(const DevTensor2&) const = default;
};

/// Symmetric 2x2 tensor [[xx, xy], [xy, yy]].
struct SymTensor2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;

  static SymTensor2 identity() { return {1.0, 1.0, 0.0}; }
  static SymTensor2 fromDev(const DevTensor2& q) { return {q.xx, -q.xx, q.xy}; }
  static SymTensor2 fromMandel(const Eigen::Vector3d& m) {
    return {m[0], m[1], m[2] / std::sqrt(2.0)};
  }
  Eigen::Vector3d mandel() const { return {xx, yy, std::sqrt(2.0) * xy}; }

  double trace() const { return xx + yy; }
  double normSquared() const { return xx * xx + yy * yy + 2.0 * xy * xy; }
  double norm() const { return std::sqrt(normSquared()); }
  double dot(const SymTensor2& o) const { return xx * o.xx + yy * o.yy + 2.0 * xy * o.xy; }

  /// Deviatoric projection: removes (tr/2) I.
  DevTensor2 dev() const { return {0.5 * (xx - yy), xy}; }

  SymTensor2 operator+(const SymTensor2& o) const { return {xx + o.xx, yy + o.yy, xy + o.xy}; }
  SymTensor2 operator-(const SymTensor2& o) const { return {xx - o.xx, yy - o.yy, xy - o.xy}; }
  SymTensor2 operator*(double s) const { return {s * xx, s * yy, s * xy}; }
  friend SymTensor2 operator*(double s, const SymTensor2& e) { return e * s; }
  SymTensor2 operator+(const DevTensor2& q) const { return *this + fromDev(q); }
  SymTensor2 operator-(const DevTensor2& q) const { return *this - fromDev(q); }
  bool operator==(const SymTensor2&) const = default;
};

/// Mandel-coordinate matrix of the deviatoric projection (rows = deviatoric basis).
inline Eigen::Matrix<double, 2, 3> deviatoricProjector() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix<double, 2, 3> P;
  P << r, -r, 0.0, 0.0, 0.0, 1.0;
  return P;
}

inline DevTensor2 apply(const DevMap& A, const DevTensor2& q) {
  return DevTensor2::fromCoords(A * q.coords());
}

inline SymTensor2 apply(const SymMap& A, const SymTensor2& e) {
  return SymTensor2::fromMandel(A * e.mandel());
}

}  // namespace phasetop
