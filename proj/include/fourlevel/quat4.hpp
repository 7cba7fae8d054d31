#pragma once

// Quaternion algebra and the quaternion description of rotations in four
// dimensions: left/right isoclinic matrices, their commuting product, and
// the split of a rotation into two completely orthogonal invariant planes.

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "fourlevel/errors.hpp"

namespace fourlevel {

using Matrix4R = Eigen::Matrix4d;
using Vector4R = Eigen::Vector4d;

// Inputs claimed to be unit quaternions are accepted (and renormalized) if
// their norm is within this distance of one; anything further is rejected.
inline constexpr double kUnitNormWindow = 1e-6;

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Quaternion() = default;
  constexpr Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  // Checked unit quaternion: normalizes inside the tolerance window, throws outside.
  static Quaternion unit(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitNormWindow) {
      throw InvalidArgument("quaternion is not unit-norm (|q| = " + std::to_string(n) + ")");
    }
    return {w / n, x / n, y / n, z / n};
  }

  static Quaternion from_vector(const Vector4R& v) { return {v[0], v[1], v[2], v[3]}; }

  double norm_sq() const { return w * w + x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm_sq()); }
  double vector_norm() const { return std::sqrt(x * x + y * y + z * z); }

  Quaternion conjugate() const { return {w, -x, -y, -z}; }
  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  Quaternion operator+(const Quaternion& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
  Quaternion operator-(const Quaternion& o) const { return {w - o.w, x - o.x, y - o.y, z - o.z}; }
  Quaternion operator*(double s) const { return {w * s, x * s, y * s, z * s}; }

  Vector4R vec() const { return {w, x, y, z}; }

  bool is_unit(double tol = 1e-12) const { return std::abs(norm_sq() - 1.0) <= tol; }
  bool is_pure_unit(double tol = 1e-12) const {
    return std::abs(w) <= tol && std::abs(x * x + y * y + z * z - 1.0) <= tol;
  }
};

// Hamilton product, i^2 = j^2 = k^2 = ijk = -1.
inline Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

inline Quaternion operator*(const Quaternion& a, const Quaternion& b) { return quat_mul(a, b); }

namespace detail {

inline Quaternion require_unit(const Quaternion& q, const char* who) {
  const double n = q.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitNormWindow) {
    throw InvalidArgument(std::string(who) + ": expected a unit quaternion (|q| = " +
                          std::to_string(n) + ")");
  }
  return q * (1.0 / n);
}

}  // namespace detail

// e^{u gamma} = cos(gamma) + u sin(gamma) for a pure unit quaternion u.
inline Quaternion quat_exp(const Quaternion& u, double gamma) {
  if (std::abs(u.w) > 1e-9 || std::abs(u.vector_norm() - 1.0) > kUnitNormWindow) {
    throw InvalidArgument("quat_exp: generator must be a pure unit quaternion");
  }
  const double s = std::sin(gamma) / u.vector_norm();
  return {std::cos(gamma), u.x * s, u.y * s, u.z * s};
}

// Matrix of C -> q C (left multiplication).
inline Matrix4R left_isoclinic(const Quaternion& q_in) {
  const Quaternion q = detail::require_unit(q_in, "left_isoclinic");
  Matrix4R m;
  m << q.w, -q.x, -q.y, -q.z,
       q.x,  q.w, -q.z,  q.y,
       q.y,  q.z,  q.w, -q.x,
       q.z, -q.y,  q.x,  q.w;
  return m;
}

// Matrix of C -> C p (right multiplication).
inline Matrix4R right_isoclinic(const Quaternion& p_in) {
  const Quaternion p = detail::require_unit(p_in, "right_isoclinic");
  Matrix4R m;
  m << p.w, -p.x, -p.y, -p.z,
       p.x,  p.w,  p.z, -p.y,
       p.y, -p.z,  p.w,  p.x,
       p.z,  p.y, -p.x,  p.w;
  return m;
}

// R = M_L(q) M_R(p): the rotation C -> q C p.
inline Matrix4R cayley_rotation(const Quaternion& q, const Quaternion& p) {
  return left_isoclinic(q) * right_isoclinic(p);
}

inline bool is_rotation(const Matrix4R& m, double tol = 1e-10) {
  const double orth = (m.transpose() * m - Matrix4R::Identity()).cwiseAbs().maxCoeff();
  return orth <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

enum class RotationKind { Identity, Simple, Double, LeftIsoclinic, RightIsoclinic };

inline const char* to_string(RotationKind k) {
  switch (k) {
    case RotationKind::Identity: return "identity";
    case RotationKind::Simple: return "simple";
    case RotationKind::Double: return "double";
    case RotationKind::LeftIsoclinic: return "left-isoclinic";
    case RotationKind::RightIsoclinic: return "right-isoclinic";
  }
  return "?";
}

struct RotationDecomposition {
  std::array<Vector4R, 2> plane1;  // orthonormal basis, rotated by angle1
  std::array<Vector4R, 2> plane2;  // orthonormal basis, rotated by angle2
  double angle1 = 0.0;             // in [0, pi]
  double angle2 = 0.0;             // in [0, pi]
  RotationKind kind = RotationKind::Identity;
};

inline constexpr double kAngleClassTol = 1e-9;

namespace detail {

// |x| reduced to the principal rotation angle in [0, pi].
inline double principal_angle(double x) {
  return std::abs(std::remainder(x, 2.0 * std::numbers::pi));
}

// Orthonormal bases of span(a, b) and of its orthogonal complement.
inline std::pair<std::array<Vector4R, 2>, std::array<Vector4R, 2>> plane_and_complement(
    const Vector4R& a, const Vector4R& b) {
  Eigen::Matrix<double, 4, 2> basis;
  basis.col(0) = a;
  basis.col(1) = b;
  Eigen::HouseholderQR<Eigen::Matrix<double, 4, 2>> qr(basis);
  const Matrix4R q = qr.householderQ();
  return {{q.col(0), q.col(1)}, {q.col(2), q.col(3)}};
}

struct AxisAngle {
  double gamma;     // in [0, pi]
  Quaternion axis;  // pure unit, or zero when gamma is 0 or pi
  bool has_axis;
};

inline AxisAngle axis_angle(const Quaternion& q) {
  const double s = q.vector_norm();
  const double gamma = std::atan2(s, q.w);
  if (s <= 1e-14) return {gamma, {0, 0, 0, 0}, false};
  return {gamma, {0.0, q.x / s, q.y / s, q.z / s}, true};
}

}  // namespace detail

// Invariant planes and angles of C -> q C p.  With q = e^{u g1}, p = e^{v g2},
// span(u+v, uv-1) turns through |g1+g2| and span(v-u, uv+1) through |g1-g2|.
inline RotationDecomposition decompose_rotation(const Quaternion& q_in, const Quaternion& p_in) {
  const Quaternion q = detail::require_unit(q_in, "decompose_rotation");
  const Quaternion p = detail::require_unit(p_in, "decompose_rotation");

  auto [g1, u, has_u] = detail::axis_angle(q);
  auto [g2, v, has_v] = detail::axis_angle(p);
  if (!has_u && !has_v) {
    u = v = Quaternion{0, 1, 0, 0};
  } else if (!has_u) {
    u = v;
  } else if (!has_v) {
    v = u;
  }

  RotationDecomposition out;
  out.angle1 = detail::principal_angle(g1 + g2);
  out.angle2 = detail::principal_angle(g1 - g2);

  const Quaternion one{1, 0, 0, 0};
  const double uv_dot = u.x * v.x + u.y * v.y + u.z * v.z;
  // Build whichever spanning pair is well conditioned; the other plane is its complement.
  if (uv_dot >= 0.0) {
    auto [p1, p2] = detail::plane_and_complement((u + v).vec(), (u * v - one).vec());
    out.plane1 = p1;
    out.plane2 = p2;
  } else {
    auto [p2, p1] = detail::plane_and_complement((v - u).vec(), (u * v + one).vec());
    out.plane1 = p1;
    out.plane2 = p2;
  }

  const double a1 = out.angle1;
  const double a2 = out.angle2;
  if (a1 < kAngleClassTol && a2 < kAngleClassTol) {
    out.kind = RotationKind::Identity;
  } else if (std::abs(a1 - a2) < kAngleClassTol) {
    // Equal angles force sin(g1) sin(g2) = 0; the trivial factor decides the handedness.
    out.kind = std::abs(std::sin(g2)) <= std::abs(std::sin(g1)) ? RotationKind::LeftIsoclinic
                                                                 : RotationKind::RightIsoclinic;
  } else if (a1 < kAngleClassTol || a2 < kAngleClassTol) {
    out.kind = RotationKind::Simple;
  } else {
    out.kind = RotationKind::Double;
  }
  return out;
}

}  // namespace fourlevel
