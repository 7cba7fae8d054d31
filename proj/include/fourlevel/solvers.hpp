#pragma once

// Boundary-value solvers for the three coupling topologies. Each one fixes
// enough angle relations to cancel the forbidden couplings identically, then
// picks the final angles so that U_r(T)|1> equals the requested amplitudes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fourlevel/hamiltonian.hpp"
#include "fourlevel/rotation_engine.hpp"

namespace fourlevel {

enum class LevelConfig { InverseTripod, Diamond, NType };

inline const char* to_string(LevelConfig c) {
  switch (c) {
    case LevelConfig::InverseTripod: return "tripod";
    case LevelConfig::Diamond: return "diamond";
    case LevelConfig::NType: return "ntype";
  }
  return "?";
}

// Level pairs (n < m, 1-based) whose coupling must vanish.
inline std::vector<std::pair<int, int>> forbidden_pairs(LevelConfig c) {
  switch (c) {
    case LevelConfig::InverseTripod: return {{2, 3}, {2, 4}, {3, 4}};
    case LevelConfig::Diamond: return {{1, 4}, {2, 3}};
    case LevelConfig::NType: return {{1, 3}, {1, 4}, {2, 4}};
  }
  return {};
}

inline bool is_allowed(LevelConfig c, int n, int m) {
  for (auto [a, b] : forbidden_pairs(c)) {
    if ((a == n && b == m) || (a == m && b == n)) return false;
  }
  return true;
}

struct TargetSpec {
  Vector4R b = Vector4R::UnitX();
  std::optional<double> theta1;                      // diamond: free angle
  std::optional<std::array<double, 3>> ntype_seed;   // N-type: (theta1, theta2, gamma2(T))

  void validate() const {
    if (!b.allFinite()) throw InvalidArgument("target amplitudes must be finite");
    if (std::abs(b.squaredNorm() - 1.0) > 1e-10) {
      throw InvalidArgument("target amplitudes are not normalized (sum b^2 = " +
                            std::to_string(b.squaredNorm()) + ")");
    }
  }
};

struct SolvedAngles {
  LevelConfig config = LevelConfig::InverseTripod;
  AngleSchedule schedule;
  AnglePair boundary;                  // angles at t = T
  double constraint_residual = 0.0;    // max forbidden |Omega| over a sampled grid
  double final_residual = 0.0;         // |U_r(T) e1 - b|
  std::string branch;                  // which solution branch produced the angles
};

inline Matrix4C analytic_evolution(const SolvedAngles& s, const PhaseSchedule& ph, double t) {
  return analytic_evolution(s.schedule, ph, t);
}

// Names the angles that leave the nominal ranges gamma, theta in [0, pi],
// phi in [0, 2 pi]; empty when all are inside.
inline std::string range_report(const AnglePair& a) {
  constexpr double pi = std::numbers::pi;
  constexpr double slack = 1e-12;
  std::ostringstream os;
  auto check = [&](const char* name, double v, double hi) {
    if (v < -slack || v > hi + slack) os << (os.tellp() > 0 ? ", " : "") << name << " = " << v;
  };
  check("gamma1", a.gamma1, pi);
  check("theta1", a.theta1, pi);
  check("phi1", a.phi1, 2 * pi);
  check("gamma2", a.gamma2, pi);
  check("theta2", a.theta2, pi);
  check("phi2", a.phi2, 2 * pi);
  return os.str();
}

inline constexpr int kConstraintGrid = 200;

namespace detail {

inline double forbidden_coupling_max(LevelConfig c, const AngleSchedule& s, int grid = kConstraintGrid) {
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double t = s.horizon * i / (grid - 1);
    const CouplingSet k = hr_analytic(s.value(t), s.rate(t));
    for (auto [n, m] : forbidden_pairs(c)) worst = std::max(worst, std::abs(k.at(n, m)));
  }
  return worst;
}

inline double final_state_residual(const AnglePair& boundary, const Vector4R& b) {
  return (ur_of_angles(boundary).col(0) - b).norm();
}

inline SolvedAngles finish(LevelConfig c, const AnglePair& boundary, double T, const Vector4R& b,
                           std::string branch) {
  SolvedAngles s;
  s.config = c;
  s.boundary = boundary;
  s.schedule = cosine_ramp_schedule(boundary, T);
  s.constraint_residual = forbidden_coupling_max(c, s.schedule);
  s.final_residual = final_state_residual(boundary, b);
  s.branch = std::move(branch);
  return s;
}

inline double wrap_0_2pi(double x) {
  double r = std::fmod(x, 2.0 * std::numbers::pi);
  if (r < 0.0) r += 2.0 * std::numbers::pi;
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Inverse tripod: equal angle pairs, gamma(t) common, theta and phi constant.
// b = (cos 2g, sin 2g cos th, sin 2g sin th cos ph, sin 2g sin th sin ph).

inline SolvedAngles solve_tripod(const TargetSpec& target, double T = 1.0) {
  target.validate();
  const Vector4R& b = target.b;
  const double r234 = std::sqrt(b[1] * b[1] + b[2] * b[2] + b[3] * b[3]);
  const double r34 = std::sqrt(b[2] * b[2] + b[3] * b[3]);

  const double gamma = 0.5 * std::atan2(r234, b[0]);
  double theta = 0.0;
  double phi = 0.0;
  std::string branch = "generic";
  if (r234 == 0.0) {
    branch = "degenerate: b2 = b3 = b4 = 0, theta = phi = 0";
  } else {
    theta = std::atan2(r34, b[1]);
    if (r34 == 0.0) {
      branch = "degenerate: b3 = b4 = 0, phi = 0";
    } else {
      phi = detail::wrap_0_2pi(std::atan2(b[3], b[2]));
    }
  }
  const AnglePair boundary{gamma, theta, phi, gamma, theta, phi};
  return detail::finish(LevelConfig::InverseTripod, boundary, T, b, branch);
}

// ---------------------------------------------------------------------------
// Diamond: phi1 = phi2 = 0, theta1 and theta2 constant.

// Final amplitudes U_r(T)|1> on the diamond constraint manifold.
inline Vector4R diamond_final_state(double gamma1, double gamma2, double theta1, double theta2) {
  const double c1 = std::cos(gamma1), s1 = std::sin(gamma1);
  const double c2 = std::cos(gamma2), s2 = std::sin(gamma2);
  return {c1 * c2 - std::cos(theta1 - theta2) * s1 * s2,
          s1 * c2 * std::cos(theta1) + c1 * s2 * std::cos(theta2),
          s1 * c2 * std::sin(theta1) + c1 * s2 * std::sin(theta2),
          -s1 * s2 * std::sin(theta1 - theta2)};
}

inline constexpr double kDiamondAcceptResidual = 1e-9;

inline SolvedAngles solve_diamond(const TargetSpec& target, double T = 1.0) {
  target.validate();
  if (!target.theta1) throw InvalidArgument("solve_diamond: theta1 must be supplied");
  const double theta1 = *target.theta1;
  const Vector4R& b = target.b;
  const Vector4R e1 = Vector4R::UnitX();

  // The closed form is 0/0 at b = +-|1>.
  if ((b - e1).norm() < 1e-12) {
    return detail::finish(LevelConfig::Diamond, {0.0, theta1, 0.0, 0.0, 0.0, 0.0}, T, b,
                          "identity target");
  }
  if ((b + e1).norm() < 1e-12) {
    return detail::finish(LevelConfig::Diamond,
                          {std::numbers::pi, theta1, 0.0, 0.0, 0.0, 0.0}, T, b,
                          "sign-flip target");
  }

  const double b1 = b[0], b2 = b[1], b3 = b[2], b4 = b[3];
  const double E = std::cos(theta1), G = std::sin(theta1);
  const double den = (b3 * b3 + b4 * b4) * E * E - 2.0 * b2 * b3 * E * G + (b2 * b2 + b4 * b4) * G * G;
  if (std::abs(den) < 1e-14) {
    std::ostringstream os;
    os << "solve_diamond: theta1 = " << theta1
       << " makes (b3^2+b4^2)E^2 - 2 b2 b3 E G + (b2^2+b4^2)G^2 vanish; choose another theta1";
    throw SingularParameterization(os.str());
  }
  const double root = std::sqrt(b4 * b4 + (b3 * E - b2 * G) * (b3 * E - b2 * G));
  const double A = (b3 * E - b2 * G) / root;
  const double C = b4 / root;
  const double B = ((b1 * b3 + b2 * b4) * E + (b3 * b4 - b1 * b2) * G) * root / den;
  const double gamma1 = std::atan2(C, A);

  double best = std::numeric_limits<double>::infinity();
  for (const double sign : {1.0, -1.0}) {
    const double D = sign * std::sqrt(std::max(0.0, 1.0 - B * B));
    const double gamma2 = std::atan2(D, B);
    std::vector<std::pair<double, std::string>> theta2_candidates;
    if (std::abs(D) < 1e-12) {
      // gamma2 in {0, pi}: theta2 drops out of the final state.
      theta2_candidates.emplace_back(0.0, "D = 0, theta2 free (set to 0)");
    } else {
      const double F = -((b4 * b1 - b2 * b3) * E + (b2 * b2 + b4 * b4) * G) * root / (den * D);
      const double H = ((b3 * b3 + b4 * b4) * E - (b2 * b3 + b1 * b4) * G) * root / (den * D);
      theta2_candidates.emplace_back(std::atan2(H, F), "theta2 = atan2(H, F)");
      theta2_candidates.emplace_back(std::acos(std::clamp(F, -1.0, 1.0)), "theta2 = acos(F)");
    }
    for (const auto& [theta2, label] : theta2_candidates) {
      const double r = (diamond_final_state(gamma1, gamma2, theta1, theta2) - b).norm();
      best = std::min(best, r);
      if (r < kDiamondAcceptResidual) {
        const std::string branch = std::string(sign > 0 ? "D > 0" : "D < 0") + ", " + label;
        return detail::finish(LevelConfig::Diamond, {gamma1, theta1, 0.0, gamma2, theta2, 0.0}, T,
                              b, branch);
      }
    }
  }
  throw BranchError("solve_diamond: no sign/quadrant branch reproduces the target (best residual " +
                    std::to_string(best) + ")");
}

// ---------------------------------------------------------------------------
// N-type: phi1 = phi2 = pi/2, constant thetas, gamma1 = -(sin th2 / sin th1) gamma2.

struct NTypeOptions {
  std::uint64_t seed = 0;
  int random_starts = 16;      // on top of the 4x4x4 deterministic grid
  int max_iterations = 200;
  double accept_residual = 1e-8;
};

namespace detail {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

inline AnglePair ntype_angles(double theta1, double theta2, double gamma2) {
  const double gamma1 = -(std::sin(theta2) / std::sin(theta1)) * gamma2;
  return {gamma1, theta1, kHalfPi, gamma2, theta2, kHalfPi};
}

inline Vector4R ntype_residual(const Eigen::Vector3d& x, const Vector4R& b) {
  return ur_of_angles(ntype_angles(x[0], x[1], x[2])).col(0) - b;
}

struct LmResult {
  Eigen::Vector3d x;
  double residual;
};

// Levenberg-Marquardt with Marquardt scaling and a central-difference Jacobian.
inline LmResult ntype_lm(Eigen::Vector3d x, const Vector4R& b, int max_iter) {
  auto ok = [](const Eigen::Vector3d& y) { return std::abs(std::sin(y[0])) > 1e-6; };
  auto cost = [&](const Eigen::Vector3d& y) {
    return ok(y) ? ntype_residual(y, b).norm() : std::numeric_limits<double>::infinity();
  };
  double f = cost(x);
  if (!std::isfinite(f)) return {x, f};
  double lambda = 1e-3;
  for (int it = 0; it < max_iter && f > 1e-15; ++it) {
    const Vector4R r = ntype_residual(x, b);
    Eigen::Matrix<double, 4, 3> J;
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-7;
      Eigen::Vector3d xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      J.col(k) = (ntype_residual(xp, b) - ntype_residual(xm, b)) / (2.0 * h);
    }
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix3d M = JtJ;
      for (int k = 0; k < 3; ++k) M(k, k) += lambda * std::max(JtJ(k, k), 1e-12);
      const Eigen::Vector3d step = M.ldlt().solve(-g);
      const Eigen::Vector3d xn = x + step;
      const double fn = cost(xn);
      if (fn < f) {
        const double moved = step.norm();
        x = xn;
        f = fn;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (moved < 1e-15) it = max_iter;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }
  return {x, f};
}

}  // namespace detail

inline SolvedAngles solve_ntype(const TargetSpec& target, double T = 1.0, const NTypeOptions& opt = {}) {
  target.validate();
  const Vector4R& b = target.b;
  if ((b - Vector4R::UnitX()).norm() < 1e-12) {
    return detail::finish(LevelConfig::NType, detail::ntype_angles(detail::kHalfPi, detail::kHalfPi, 0.0),
                          T, b, "identity target");
  }

  std::vector<Eigen::Vector3d> starts;
  bool has_seed = false;
  if (target.ntype_seed) {
    const auto& s = *target.ntype_seed;
    if (std::abs(std::sin(s[0])) < 1e-12) {
      throw ConstraintSingularity("solve_ntype: sin(theta1) = 0 makes gamma1 = -(sin th2/sin th1) gamma2 undefined");
    }
    starts.emplace_back(s[0], s[1], s[2]);
    has_seed = true;
  }
  const std::array<double, 4> th1_grid{0.45, 1.2, 1.95, 2.7};
  const std::array<double, 4> th2_grid{-2.4, -0.8, 0.8, 2.4};
  const std::array<double, 4> g2_grid{-1.2, -0.4, 0.4, 1.2};
  for (double a : th1_grid)
    for (double c : th2_grid)
      for (double g : g2_grid) starts.emplace_back(a, c, g);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u_th1(0.2, std::numbers::pi - 0.2);
  std::uniform_real_distribution<double> u_th2(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> u_g2(-std::numbers::pi / 2, std::numbers::pi / 2);
  for (int k = 0; k < opt.random_starts; ++k) {
    const double a = u_th1(rng);
    const double c = u_th2(rng);
    const double g = u_g2(rng);
    starts.emplace_back(a, c, g);
  }

  detail::LmResult best{starts.front(), std::numeric_limits<double>::infinity()};
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const detail::LmResult r = detail::ntype_lm(starts[i], b, opt.max_iterations);
    if (r.residual < best.residual) {
      best = r;
      best_index = i;
    }
    // A converged explicit seed wins outright so callers can pin a particular root.
    if (has_seed && i == 0 && r.residual < opt.accept_residual) break;
  }
  if (!(best.residual < opt.accept_residual)) {
    throw NoSolutionFound("solve_ntype: no start converged (best residual " +
                              std::to_string(best.residual) + ")",
                          best.residual);
  }
  const AnglePair boundary = detail::ntype_angles(best.x[0], best.x[1], best.x[2]);
  std::string branch = has_seed && best_index == 0 ? "seed" : "start " + std::to_string(best_index);
  return detail::finish(LevelConfig::NType, boundary, T, b, branch);
}

inline SolvedAngles solve(LevelConfig c, const TargetSpec& target, double T = 1.0,
                          const NTypeOptions& opt = {}) {
  switch (c) {
    case LevelConfig::InverseTripod: return solve_tripod(target, T);
    case LevelConfig::Diamond: return solve_diamond(target, T);
    case LevelConfig::NType: return solve_ntype(target, T, opt);
  }
  throw InvalidArgument("unknown configuration");
}

// ---------------------------------------------------------------------------
// Closed-form coupling waveforms per configuration; forbidden entries are exactly 0.

inline CouplingSet coupling_schedules(LevelConfig c, const SolvedAngles& s, double t) {
  const AnglePair a = s.schedule.value(t);
  const AnglePair d = s.schedule.rate(t);
  CouplingSet k;
  switch (c) {
    case LevelConfig::InverseTripod: {
      const double g = -2.0 * d.gamma1;
      k.omega12 = g * std::cos(a.theta1);
      k.omega13 = g * std::sin(a.theta1) * std::cos(a.phi1);
      k.omega14 = g * std::sin(a.theta1) * std::sin(a.phi1);
      break;
    }
    case LevelConfig::Diamond: {
      const double c1 = std::cos(a.theta1), s1 = std::sin(a.theta1);
      const double c2 = std::cos(a.theta2), s2 = std::sin(a.theta2);
      k.omega12 = -(d.gamma1 * c1 + d.gamma2 * c2);
      k.omega13 = -(d.gamma1 * s1 + d.gamma2 * s2);
      k.omega24 = d.gamma1 * s1 - d.gamma2 * s2;
      k.omega34 = -(d.gamma1 * c1 - d.gamma2 * c2);
      break;
    }
    case LevelConfig::NType: {
      const double cot1 = std::cos(a.theta1) / std::sin(a.theta1);
      const double s2 = std::sin(a.theta2), c2 = std::cos(a.theta2);
      k.omega12 = d.gamma2 * (s2 * cot1 - c2);
      k.omega23 = 2.0 * d.gamma2 * s2;
      k.omega34 = d.gamma2 * (s2 * cot1 + c2);
      break;
    }
  }
  return k;
}

inline CouplingSet coupling_schedules(const SolvedAngles& s, double t) {
  return coupling_schedules(s.config, s, t);
}

// Tripod pulse as Cartesian coordinates of a point on a sphere of radius gamma'(t):
// gamma'(cos th, sin th cos ph, sin th sin ph). The actual couplings are -2 times this.
inline std::array<double, 3> tripod_sphere_amplitudes(const SolvedAngles& s, double t) {
  const AnglePair a = s.schedule.value(t);
  const double g = s.schedule.rate(t).gamma1;
  return {g * std::cos(a.theta1), g * std::sin(a.theta1) * std::cos(a.phi1),
          g * std::sin(a.theta1) * std::sin(a.phi1)};
}

}  // namespace fourlevel
