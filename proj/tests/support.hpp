#pragma once

// Test-side oracles. Nothing here calls into the library's quaternion or
// rotation code: the Hamilton product is written out with dot/cross products
// and U_r is rebuilt column by column from q e_k p.

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using V4 = Eigen::Vector4d;
using M4 = Eigen::Matrix4d;
constexpr double pi = std::numbers::pi;

// (a0 + a) (b0 + b) = a0 b0 - a.b + a0 b + b0 a + a x b
inline V4 hamilton(const V4& a, const V4& b) {
  const Eigen::Vector3d av = a.tail<3>(), bv = b.tail<3>();
  V4 r;
  r[0] = a[0] * b[0] - av.dot(bv);
  r.tail<3>() = a[0] * bv + b[0] * av + av.cross(bv);
  return r;
}

inline V4 sphere_quat(double g, double th, double ph) {
  return {std::cos(g), std::sin(g) * std::cos(th), std::sin(g) * std::sin(th) * std::cos(ph),
          std::sin(g) * std::sin(th) * std::sin(ph)};
}

// Columns q e_k p for the map C -> q C p.
inline M4 ur(const V4& q, const V4& p) {
  M4 m;
  for (int k = 0; k < 4; ++k) m.col(k) = hamilton(hamilton(q, V4::Unit(k)), p);
  return m;
}

inline M4 ur(const std::array<double, 6>& a) {
  return ur(sphere_quat(a[0], a[1], a[2]), sphere_quat(a[3], a[4], a[5]));
}

// Final state from |1>: q 1 p = q p.
inline V4 final_state(const std::array<double, 6>& a) {
  return hamilton(sphere_quat(a[0], a[1], a[2]), sphere_quat(a[3], a[4], a[5]));
}

// dU/dt U^T by a fourth-order centred difference of an angle path.
template <class Path>
M4 generator(const Path& angles_at, double t, double h) {
  const M4 du = (-ur(angles_at(t + 2 * h)) + 8.0 * ur(angles_at(t + h)) - 8.0 * ur(angles_at(t - h)) +
                 ur(angles_at(t - 2 * h))) /
                (12.0 * h);
  return du * ur(angles_at(t)).transpose();
}

// Composite Simpson rule on [a, b] with n (even) intervals.
template <class F>
double simpson(const F& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  V4 unit4() {
    std::normal_distribution<double> n;
    V4 v(n(gen_), n(gen_), n(gen_), n(gen_));
    return v / v.norm();
  }
  std::array<double, 6> angles(double span = pi) {
    std::array<double, 6> a{};
    for (auto& x : a) x = uniform(-span, span);
    return a;
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace oracle
