#pragma once

// Evolution operator U_r and rotation Hamiltonian H_r = i dU_r/dt U_r^T of the
// real amplitude vector, parameterized by six generalized spherical angles.
//
// Coupling convention: H_r = i * sum_{n<m} Omega_nm (|n><m| - |m><n|), hbar = 1,
// i.e. Omega_nm is the (n,m) entry of the real antisymmetric dU_r/dt U_r^T.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <utility>

#include "fourlevel/quat4.hpp"

namespace fourlevel {

struct AnglePair {
  double gamma1 = 0.0;
  double theta1 = 0.0;
  double phi1 = 0.0;
  double gamma2 = 0.0;
  double theta2 = 0.0;
  double phi2 = 0.0;

  std::array<double, 6> as_array() const { return {gamma1, theta1, phi1, gamma2, theta2, phi2}; }
  static AnglePair from_array(const std::array<double, 6>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }

  AnglePair operator+(const AnglePair& o) const {
    return {gamma1 + o.gamma1, theta1 + o.theta1, phi1 + o.phi1,
            gamma2 + o.gamma2, theta2 + o.theta2, phi2 + o.phi2};
  }
  AnglePair operator*(double s) const {
    return {gamma1 * s, theta1 * s, phi1 * s, gamma2 * s, theta2 * s, phi2 * s};
  }

  bool is_finite() const {
    const auto a = as_array();
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
  }
};

// Angles and their time derivatives as paired closures; value and rate must agree.
struct AngleSchedule {
  std::function<AnglePair(double)> value;
  std::function<AnglePair(double)> rate;
  double horizon = 1.0;
};

inline AngleSchedule constant_schedule(const AnglePair& a, double horizon) {
  return {[a](double) { return a; }, [](double) { return AnglePair{}; }, horizon};
}

// gamma_i(t) = gamma_i(T) [1 - cos(pi t/T)] / 2 with theta_i, phi_i held at their
// boundary values. The ramp switches on and off with zero slope.
inline AngleSchedule cosine_ramp_schedule(const AnglePair& boundary, double horizon) {
  const double w = std::numbers::pi / horizon;
  auto value = [boundary, w](double t) {
    AnglePair a = boundary;
    const double s = 0.5 * (1.0 - std::cos(w * t));
    a.gamma1 = boundary.gamma1 * s;
    a.gamma2 = boundary.gamma2 * s;
    return a;
  };
  auto rate = [boundary, w](double t) {
    const double s = 0.5 * w * std::sin(w * t);
    AnglePair r;
    r.gamma1 = boundary.gamma1 * s;
    r.gamma2 = boundary.gamma2 * s;
    return r;
  };
  return {value, rate, horizon};
}

struct CouplingSet {
  double omega12 = 0.0;
  double omega13 = 0.0;
  double omega14 = 0.0;
  double omega23 = 0.0;
  double omega24 = 0.0;
  double omega34 = 0.0;

  std::array<double, 6> as_array() const {
    return {omega12, omega13, omega14, omega23, omega24, omega34};
  }

  // Coupling between levels n < m, 1-based.
  double at(int n, int m) const {
    if (n > m) std::swap(n, m);
    if (n == 1 && m == 2) return omega12;
    if (n == 1 && m == 3) return omega13;
    if (n == 1 && m == 4) return omega14;
    if (n == 2 && m == 3) return omega23;
    if (n == 2 && m == 4) return omega24;
    if (n == 3 && m == 4) return omega34;
    throw InvalidArgument("CouplingSet::at: no such pair");
  }

  double max_abs_difference(const CouplingSet& o) const {
    const auto a = as_array();
    const auto b = o.as_array();
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
  }

  bool is_finite() const {
    const auto a = as_array();
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
  }
};

// Real antisymmetric generator with the couplings above the diagonal.
inline Matrix4R coupling_generator(const CouplingSet& c) {
  Matrix4R m;
  m <<          0.0,  c.omega12,  c.omega13, c.omega14,
       -c.omega12,          0.0,  c.omega23, c.omega24,
       -c.omega13, -c.omega23,          0.0, c.omega34,
       -c.omega14, -c.omega24, -c.omega34,        0.0;
  return m;
}

// Read-off from a (nearly) antisymmetric generator, symmetrizing first.
inline CouplingSet couplings_from_generator(const Matrix4R& g) {
  const Matrix4R a = 0.5 * (g - g.transpose());
  return {a(0, 1), a(0, 2), a(0, 3), a(1, 2), a(1, 3), a(2, 3)};
}

inline std::pair<Quaternion, Quaternion> spherical_to_quats(const AnglePair& a) {
  const double sg1 = std::sin(a.gamma1);
  const double sg2 = std::sin(a.gamma2);
  Quaternion q{std::cos(a.gamma1), sg1 * std::cos(a.theta1),
               sg1 * std::sin(a.theta1) * std::cos(a.phi1),
               sg1 * std::sin(a.theta1) * std::sin(a.phi1)};
  Quaternion p{std::cos(a.gamma2), sg2 * std::cos(a.theta2),
               sg2 * std::sin(a.theta2) * std::cos(a.phi2),
               sg2 * std::sin(a.theta2) * std::sin(a.phi2)};
  return {q, p};
}

// Closed-form U_r in terms of the spherical angles.
inline Matrix4R ur_of_angles(const AnglePair& a) {
  const double sg1 = std::sin(a.gamma1), cg1 = std::cos(a.gamma1);
  const double sg2 = std::sin(a.gamma2), cg2 = std::cos(a.gamma2);
  const double st1 = std::sin(a.theta1), ct1 = std::cos(a.theta1);
  const double st2 = std::sin(a.theta2), ct2 = std::cos(a.theta2);
  const double sf1 = std::sin(a.phi1), cf1 = std::cos(a.phi1);
  const double sf2 = std::sin(a.phi2), cf2 = std::cos(a.phi2);
  const double cdiff = std::cos(a.phi1 - a.phi2), sdiff = std::sin(a.phi1 - a.phi2);
  const double csum = std::cos(a.phi1 + a.phi2), ssum = std::sin(a.phi1 + a.phi2);

  Matrix4R u;
  u(0, 0) = cg1 * cg2 - sg1 * sg2 * (st1 * st2 * cdiff + ct1 * ct2);
  u(1, 0) = sg2 * (ct2 * cg1 - st1 * st2 * sg1 * sdiff) + ct1 * sg1 * cg2;
  u(2, 0) = sg2 * (sg1 * (st1 * ct2 * sf1 - ct1 * st2 * sf2) + st2 * cg1 * cf2) + st1 * sg1 * cg2 * cf1;
  u(3, 0) = sg2 * (sg1 * (ct1 * st2 * cf2 - st1 * ct2 * cf1) + st2 * cg1 * sf2) + st1 * sg1 * cg2 * sf1;

  u(0, 1) = -sg2 * (st1 * st2 * sg1 * sdiff + ct2 * cg1) - ct1 * sg1 * cg2;
  u(1, 1) = sg1 * sg2 * (st1 * st2 * cdiff - ct1 * ct2) + cg1 * cg2;
  u(2, 1) = st1 * sg1 * cg2 * sf1 - sg2 * (sg1 * (st1 * ct2 * cf1 + ct1 * st2 * cf2) + st2 * cg1 * sf2);
  u(3, 1) = st2 * cg1 * sg2 * cf2 - sg1 * (sg2 * (st1 * ct2 * sf1 + ct1 * st2 * sf2) + st1 * cg2 * cf1);

  u(0, 2) = -st1 * sg1 * cg2 * cf1 - sg2 * (sg1 * (ct1 * st2 * sf2 - st1 * ct2 * sf1) + st2 * cg1 * cf2);
  u(1, 2) = st2 * cg1 * sg2 * sf2 - sg1 * (sg2 * (st1 * ct2 * cf1 + ct1 * st2 * cf2) + st1 * cg2 * sf1);
  u(2, 2) = sg1 * sg2 * (ct1 * ct2 - st1 * st2 * csum) + cg1 * cg2;
  u(3, 2) = ct1 * sg1 * cg2 - sg2 * (st1 * st2 * sg1 * ssum + ct2 * cg1);

  u(0, 3) = -st1 * sg1 * cg2 * sf1 - sg2 * (sg1 * (st1 * ct2 * cf1 - ct1 * st2 * cf2) + st2 * cg1 * sf2);
  u(1, 3) = st1 * sg1 * cg2 * cf1 - sg2 * (sg1 * (st1 * ct2 * sf1 + ct1 * st2 * sf2) + st2 * cg1 * cf2);
  u(2, 3) = ct2 * cg1 * sg2 - sg1 * (st1 * st2 * sg2 * ssum + ct1 * cg2);
  u(3, 3) = sg1 * sg2 * (st1 * st2 * csum + ct1 * ct2) + cg1 * cg2;
  return u;
}

// Same operator assembled from the quaternion pair.
inline Matrix4R ur_from_quaternions(const AnglePair& a) {
  const auto [q, p] = spherical_to_quats(a);
  return cayley_rotation(q, p);
}

// Closed-form couplings for given angles and angular rates.
inline CouplingSet hr_analytic(const AnglePair& a, const AnglePair& d) {
  const double sg1 = std::sin(a.gamma1), cg1 = std::cos(a.gamma1);
  const double sg2 = std::sin(a.gamma2), cg2 = std::cos(a.gamma2);
  const double st1 = std::sin(a.theta1), ct1 = std::cos(a.theta1);
  const double st2 = std::sin(a.theta2), ct2 = std::cos(a.theta2);
  const double sf1 = std::sin(a.phi1), cf1 = std::cos(a.phi1);
  const double sf2 = std::sin(a.phi2), cf2 = std::cos(a.phi2);
  const double dg1 = d.gamma1, dt1 = d.theta1, df1 = d.phi1;
  const double dg2 = d.gamma2, dt2 = d.theta2, df2 = d.phi2;

  CouplingSet c;
  c.omega12 = sg1 * st1 * (dt1 * cg1 - df1 * sg1 * st1) + sg2 * st2 * (dt2 * cg2 + df2 * sg2 * st2) -
              dg1 * ct1 - dg2 * ct2;
  c.omega13 = dt1 * sg1 * (sg1 * sf1 - cg1 * ct1 * cf1) - dt2 * sg2 * (sg2 * sf2 + cg2 * ct2 * cf2) -
              dg1 * st1 * cf1 - dg2 * st2 * cf2 + df1 * sg1 * st1 * (cg1 * sf1 + sg1 * ct1 * cf1) +
              df2 * sg2 * st2 * (cg2 * sf2 - sg2 * ct2 * cf2);
  c.omega14 = -dt1 * sg1 * (sg1 * cf1 + cg1 * ct1 * sf1) + dt2 * sg2 * (sg2 * cf2 - cg2 * ct2 * sf2) -
              dg1 * st1 * sf1 - dg2 * st2 * sf2 - df1 * sg1 * st1 * (cg1 * cf1 - sg1 * ct1 * sf1) -
              df2 * sg2 * st2 * (cg2 * cf2 + sg2 * ct2 * sf2);
  c.omega23 = -dt1 * sg1 * (sg1 * cf1 + cg1 * ct1 * sf1) - dt2 * sg2 * (sg2 * cf2 - cg2 * ct2 * sf2) -
              dg1 * st1 * sf1 + dg2 * st2 * sf2 - df1 * sg1 * st1 * (cg1 * cf1 - sg1 * ct1 * sf1) +
              df2 * sg2 * st2 * (cg2 * cf2 + sg2 * ct2 * sf2);
  c.omega24 = -dt1 * sg1 * (sg1 * sf1 - cg1 * ct1 * cf1) - dt2 * sg2 * (sg2 * sf2 + cg2 * ct2 * cf2) +
              dg1 * st1 * cf1 - dg2 * st2 * cf2 - df1 * sg1 * st1 * (cg1 * sf1 + sg1 * ct1 * cf1) +
              df2 * sg2 * st2 * (cg2 * sf2 - sg2 * ct2 * cf2);
  c.omega34 = sg1 * st1 * (dt1 * cg1 - df1 * sg1 * st1) - sg2 * st2 * (dt2 * cg2 + df2 * sg2 * st2) -
              dg1 * ct1 + dg2 * ct2;
  return c;
}

struct CouplingEstimate {
  CouplingSet couplings;
  bool one_sided = false;             // t -/+ h fell outside [0, T]
  double antisymmetry_residual = 0.0; // max |G + G^T| of the raw difference quotient
};

inline constexpr double kDefaultRelativeStep = 1e-5;

// Couplings from finite differences of U_r: G = dU_r/dt U_r^T, centred where
// possible, second-order one-sided at the ends of [0, T].
inline CouplingEstimate hr_numeric(const AngleSchedule& s, double t, double h) {
  if (!(h > 0.0)) throw InvalidArgument("hr_numeric: step must be positive");
  const double T = s.horizon;
  if (t < 0.0 || t > T) throw InvalidArgument("hr_numeric: t outside [0, T]");
  auto U = [&](double tau) { return ur_of_angles(s.value(tau)); };

  CouplingEstimate out;
  const Matrix4R u0 = U(t);
  Matrix4R du;
  if (t - h >= 0.0 && t + h <= T) {
    du = (U(t + h) - U(t - h)) / (2.0 * h);
  } else if (t + 2.0 * h <= T) {
    du = (-3.0 * u0 + 4.0 * U(t + h) - U(t + 2.0 * h)) / (2.0 * h);
    out.one_sided = true;
  } else {
    du = (3.0 * u0 - 4.0 * U(t - h) + U(t - 2.0 * h)) / (2.0 * h);
    out.one_sided = true;
  }
  const Matrix4R g = du * u0.transpose();
  out.antisymmetry_residual = (g + g.transpose()).cwiseAbs().maxCoeff();
  out.couplings = couplings_from_generator(g);
  return out;
}

inline CouplingEstimate hr_numeric(const AngleSchedule& s, double t) {
  return hr_numeric(s, t, kDefaultRelativeStep * s.horizon);
}

}  // namespace fourlevel
