#pragma once

// Time-dependent Schrodinger equation on C^4 with a fourth-order
// commutator-free Magnus integrator. Each step is a product of two exact
// exponentials of anti-Hermitian matrices, so the propagator stays unitary.

#include <array>
#include <cmath>
#include <complex>
#include <stop_token>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "fourlevel/hamiltonian.hpp"

namespace fourlevel {

using StateVector = Vector4C;

inline StateVector basis_state(int level) {
  if (level < 1 || level > 4) throw InvalidArgument("basis_state: level must be 1..4");
  StateVector s = StateVector::Zero();
  s(level - 1) = 1.0;
  return s;
}

inline bool is_normalized(const StateVector& s, double tol = 1e-10) {
  return std::abs(s.norm() - 1.0) <= tol;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<std::array<double, 4>> populations;
  // phi_2..phi_4; relative to arg(c_1) when phase_relative is set, raw arg(c_k) otherwise.
  std::vector<std::array<double, 3>> phases;
  std::vector<bool> phase_relative;
  double norm_drift = 0.0;

  const StateVector& final_state() const { return states.back(); }
  std::size_t size() const { return times.size(); }
};

struct PropagateOptions {
  int record_every = 1;              // keep every n-th step (the last step is always kept)
  double hermiticity_tol = 1e-9;
  double max_norm_drift = 1e-6;
  std::stop_token stop;              // polled once per step
};

inline constexpr int kMinSteps = 100;
inline constexpr int kDefaultSteps = 2000;

namespace detail {

inline double wrap_phase(double x) { return std::remainder(x, 2.0 * std::numbers::pi); }

inline void record(Trajectory& tr, double t, const StateVector& psi) {
  tr.times.push_back(t);
  tr.states.push_back(psi);
  std::array<double, 4> pop{};
  for (int k = 0; k < 4; ++k) pop[k] = std::norm(psi(k));
  tr.populations.push_back(pop);
  const bool relative = std::abs(psi(0)) > 1e-8;
  const double ref = relative ? std::arg(psi(0)) : 0.0;
  std::array<double, 3> ph{};
  for (int k = 1; k < 4; ++k) ph[k - 1] = wrap_phase(std::arg(psi(k)) - ref);
  tr.phases.push_back(ph);
  tr.phase_relative.push_back(relative);
  tr.norm_drift = std::max(tr.norm_drift, std::abs(psi.norm() - 1.0));
}

inline Matrix4C checked_sample(const HamiltonianFn& h, double t, double tol) {
  Matrix4C m = h(t);
  const double r = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (!(r <= tol)) {
    throw InvalidHamiltonian("Hamiltonian is not Hermitian at t = " + std::to_string(t) +
                             " (residual " + std::to_string(r) + ")");
  }
  return m;
}

}  // namespace detail

// One CF4 step: exp(-i dt (a1 H1 + a2 H2)) exp(-i dt (a2 H1 + a1 H2)) with H sampled at
// the two Gauss-Legendre nodes.
inline Matrix4C cf4_step(const HamiltonianFn& h, double t, double dt, double herm_tol = 1e-9) {
  static const double r3 = std::sqrt(3.0);
  const double c1 = 0.5 - r3 / 6.0;
  const double c2 = 0.5 + r3 / 6.0;
  const double a1 = 0.25 - r3 / 6.0;
  const double a2 = 0.25 + r3 / 6.0;
  const Matrix4C h1 = detail::checked_sample(h, t + c1 * dt, herm_tol);
  const Matrix4C h2 = detail::checked_sample(h, t + c2 * dt, herm_tol);
  const Matrix4C first = (Complex(0.0, -dt) * (a2 * h1 + a1 * h2)).exp();
  const Matrix4C second = (Complex(0.0, -dt) * (a1 * h1 + a2 * h2)).exp();
  return second * first;
}

inline Trajectory propagate(const HamiltonianFn& h, const StateVector& psi0, double T, int steps,
                            const PropagateOptions& opt = {}) {
  if (steps < kMinSteps) throw InvalidArgument("propagate: need at least 100 steps");
  if (!(T > 0.0)) throw InvalidArgument("propagate: horizon must be positive");
  if (!is_normalized(psi0)) throw InvalidArgument("propagate: initial state is not normalized");
  if (opt.record_every < 1) throw InvalidArgument("propagate: record_every must be >= 1");

  Trajectory tr;
  const std::size_t n_rec = static_cast<std::size_t>(steps / opt.record_every) + 2;
  tr.times.reserve(n_rec);
  tr.states.reserve(n_rec);
  tr.populations.reserve(n_rec);
  tr.phases.reserve(n_rec);

  const double dt = T / steps;
  StateVector psi = psi0;
  detail::record(tr, 0.0, psi);
  for (int n = 0; n < steps; ++n) {
    if (opt.stop.stop_requested()) throw Cancelled();
    const double t = n * dt;
    psi = cf4_step(h, t, dt, opt.hermiticity_tol) * psi;
    const bool last = n + 1 == steps;
    if (last || (n + 1) % opt.record_every == 0) {
      detail::record(tr, last ? T : (n + 1) * dt, psi);
    }
  }
  if (tr.norm_drift > opt.max_norm_drift) {
    throw AccuracyError("norm drift " + std::to_string(tr.norm_drift) +
                        " exceeds tolerance; increase the number of steps");
  }
  return tr;
}

// |<target|psi>|^2 when global phase is ignored; otherwise the squared real
// overlap max(0, Re<target|psi>)^2, which is 1 only for identical vectors.
inline double fidelity(const StateVector& psi, const StateVector& target, bool mod_global_phase) {
  const Complex overlap = target.dot(psi);  // conjugates target
  if (mod_global_phase) return std::min(1.0, std::norm(overlap));
  const double re = std::max(0.0, overlap.real());
  return std::min(1.0, re * re);
}

// Largest distance between the integrated states and K(t) U_r(t) K^dag(0) psi(0).
inline double compare_with_analytic(const Trajectory& tr, const AngleSchedule& s,
                                    const PhaseSchedule& ph) {
  if (tr.size() == 0) return 0.0;
  const StateVector psi0 = tr.states.front();
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const StateVector exact = analytic_evolution(s, ph, tr.times[i]) * psi0;
    worst = std::max(worst, (tr.states[i] - exact).norm());
  }
  return worst;
}

}  // namespace fourlevel
