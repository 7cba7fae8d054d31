#pragma once

// Quantum-optical realization of the diamond configuration: a lab-frame
// semiclassical Hamiltonian with four quadrature-modulated fields, its
// laser-adapted interaction picture, the rotating-wave approximation, and the
// map from an engineered Hamiltonian to laser frequencies and Rabi quadratures.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stop_token>
#include <string>
#include <vector>

#include "fourlevel/propagator.hpp"

namespace fourlevel {

// Driven transitions of the diamond loop, in storage order.
enum class Transition { T12 = 0, T13 = 1, T24 = 2, T34 = 3 };

inline constexpr std::array<std::pair<int, int>, 4> kDiamondTransitions{{{1, 2}, {1, 3}, {2, 4}, {3, 4}}};

// Complex Rabi frequency Omega~ + i Omega~' for each transition at time t.
using RabiSet = std::array<Complex, 4>;

struct QOParams {
  std::array<double, 3> omega_levels{0.0, 0.0, 0.0};   // w2, w3, w4 (w1 = 0)
  std::array<double, 4> omega_fields{0.0, 0.0, 0.0, 0.0};  // w12, w13, w24, w34
  std::array<double, 4> field_phases{0.0, 0.0, 0.0, 0.0};  // phi12, phi13, phi24, phi34
  std::function<RabiSet(double)> rabi = [](double) { return RabiSet{}; };
  std::vector<std::string> warnings;

  double level(int n) const { return n == 1 ? 0.0 : omega_levels.at(n - 2); }
  double field(Transition k) const { return omega_fields[static_cast<int>(k)]; }
  double field_phase(Transition k) const { return field_phases[static_cast<int>(k)]; }

  // Phi = phi12 - phi13 + phi24 - phi34.
  double closed_loop_phase() const {
    return field_phases[0] - field_phases[1] + field_phases[2] - field_phases[3];
  }
  double min_field() const { return *std::min_element(omega_fields.begin(), omega_fields.end()); }
  double max_frequency() const {
    double m = 0.0;
    for (double w : omega_fields) m = std::max(m, std::abs(w));
    for (double w : omega_levels) m = std::max(m, std::abs(w));
    return m;
  }
};

// |w13 + w34 - w12 - w24|.
inline double check_resonance(const QOParams& qo) {
  const auto& w = qo.omega_fields;
  return std::abs(w[1] + w[3] - w[0] - w[2]);
}

inline constexpr double kResonanceTol = 1e-9;

// Schrodinger-picture Hamiltonian (hbar = 1): sum_i w_i |i><i| plus, on each driven
// transition, [Omega~ cos(w t + phi) - Omega~' sin(w t + phi)] (|i><j| + |j><i|).
inline Matrix4C lab_hamiltonian(const QOParams& qo, double t) {
  Matrix4C h = Matrix4C::Zero();
  for (int n = 2; n <= 4; ++n) h(n - 1, n - 1) = qo.level(n);
  const RabiSet r = qo.rabi(t);
  for (int k = 0; k < 4; ++k) {
    const auto [i, j] = kDiamondTransitions[k];
    const double arg = qo.omega_fields[k] * t + qo.field_phases[k];
    const double v = r[k].real() * std::cos(arg) - r[k].imag() * std::sin(arg);
    h(i - 1, j - 1) = v;
    h(j - 1, i - 1) = v;
  }
  return h;
}

// Laser-adapted frame U0(t) = diag(1, e^{i(w12 t + phi12)}, e^{i(w13 t + phi13)},
// e^{i((w12 + w24) t + phi12 + phi24)}).
inline Matrix4C interaction_frame(const QOParams& qo, double t) {
  const auto& w = qo.omega_fields;
  const auto& p = qo.field_phases;
  Matrix4C u = Matrix4C::Zero();
  u(0, 0) = 1.0;
  u(1, 1) = std::polar(1.0, w[0] * t + p[0]);
  u(2, 2) = std::polar(1.0, w[1] * t + p[1]);
  u(3, 3) = std::polar(1.0, (w[0] + w[2]) * t + p[0] + p[2]);
  return u;
}

// H_I = U0 H U0^dag + i dU0/dt U0^dag, counter-rotating terms included.
inline Matrix4C interaction_picture_hamiltonian(const QOParams& qo, double t) {
  const Matrix4C u0 = interaction_frame(qo, t);
  const auto& w = qo.omega_fields;
  Matrix4C h = u0 * lab_hamiltonian(qo, t) * u0.adjoint();
  h(1, 1) -= w[0];
  h(2, 2) -= w[1];
  h(3, 3) -= w[0] + w[2];
  return h;
}

// Detunings 2(w2 - w12), 2(w3 - w13), 2(w4 - w12 - w24).
inline std::array<double, 3> rwa_detunings(const QOParams& qo) {
  const auto& w = qo.omega_fields;
  return {2.0 * (qo.level(2) - w[0]), 2.0 * (qo.level(3) - w[1]),
          2.0 * (qo.level(4) - w[0] - w[2])};
}

// (1/2) x [detunings on the diagonal, complex Rabi frequencies on the driven
// transitions, e^{-i Phi} on the 3-4 element]; the 1-4 and 2-3 elements are zero.
inline Matrix4C rwa_hamiltonian(const QOParams& qo, double t) {
  const double res = check_resonance(qo);
  if (res > kResonanceTol) {
    throw ResonanceViolation("four-photon resonance violated by " + std::to_string(res));
  }
  const auto det = rwa_detunings(qo);
  const RabiSet r = qo.rabi(t);
  Matrix4C h = Matrix4C::Zero();
  for (int n = 2; n <= 4; ++n) h(n - 1, n - 1) = 0.5 * det[n - 2];
  const Complex loop = std::polar(1.0, -qo.closed_loop_phase());
  for (int k = 0; k < 4; ++k) {
    const auto [i, j] = kDiamondTransitions[k];
    const Complex e = 0.5 * r[k] * (k == 3 ? loop : Complex(1.0));
    h(i - 1, j - 1) = e;
    h(j - 1, i - 1) = std::conj(e);
  }
  return h;
}

// Laser frequencies, phases and Rabi quadratures whose RWA Hamiltonian equals
// the engineered diamond Hamiltonian. Field phases must close the loop (Phi = 0).
inline QOParams engineered_to_qo(std::function<CouplingSet(double)> couplings, const PhaseSchedule& ph,
                                 const std::array<double, 3>& omega_levels,
                                 const std::array<double, 4>& field_phases = {0.0, 0.0, 0.0, 0.0}) {
  constexpr int kProbe = 64;
  for (int i = 0; i < kProbe; ++i) {
    const double t = ph.horizon * i / (kProbe - 1);
    const CouplingSet c = couplings(t);
    if (std::abs(c.omega14) > 1e-12 || std::abs(c.omega23) > 1e-12) {
      throw UnsupportedConfiguration(
          "engineered_to_qo: couplings 1-4 / 2-3 are present; only the diamond configuration maps");
    }
  }

  QOParams qo;
  qo.omega_levels = omega_levels;
  qo.field_phases = field_phases;
  if (std::abs(qo.closed_loop_phase()) > 1e-12) {
    throw InvalidArgument("engineered_to_qo: field phases must satisfy phi12 - phi13 + phi24 - phi34 = 0");
  }

  // Diagonal matching: w_level - w_field = -Delta_k.
  const double d2 = ph.detuning(2), d3 = ph.detuning(3), d4 = ph.detuning(4);
  const double w12 = omega_levels[0] + d2;
  const double w13 = omega_levels[1] + d3;
  const double w24 = omega_levels[2] + d4 - w12;
  const double w34 = w12 + w24 - w13;
  qo.omega_fields = {w12, w13, w24, w34};

  // Off-diagonal matching: Omega~ + i Omega~' = 2 H_jk = 2 i e^{i(phi_j - phi_k)} Omega_jk.
  qo.rabi = [couplings = std::move(couplings), ph](double t) {
    const CouplingSet c = couplings(t);
    RabiSet r;
    for (int k = 0; k < 4; ++k) {
      const auto [i, j] = kDiamondTransitions[k];
      r[k] = 2.0 * kI * std::polar(1.0, ph.phase(i, t) - ph.phase(j, t)) * c.at(i, j);
    }
    return r;
  };

  const double wmin = qo.min_field();
  for (const auto& [i, j] : kDiamondTransitions) {
    const double spread = std::abs(ph.detuning(i) - ph.detuning(j));
    if (spread > 1e-2 * wmin) {
      qo.warnings.push_back("detuning difference " + std::to_string(spread) + " on transition " +
                            std::to_string(i) + "-" + std::to_string(j) +
                            " is not small against the slowest carrier " + std::to_string(wmin));
    }
  }
  return qo;
}

// Steps needed to resolve the fastest frequency in the lab-frame Hamiltonian.
inline int lab_frame_steps(const QOParams& qo, double T, int samples_per_period = 40) {
  const double period = 2.0 * std::numbers::pi / qo.max_frequency();
  return std::max(kMinSteps, static_cast<int>(std::ceil(samples_per_period * T / period)));
}

struct RwaComparison {
  std::array<double, 4> lab_populations{};
  std::array<double, 4> rwa_populations{};
  double population_gap = 0.0;  // max_k |P_lab - P_rwa| at t = T
  int lab_steps = 0;
};

// Propagates |1> under the lab-frame and the RWA Hamiltonians and compares the
// final populations. The lab-frame run is cancellable through `stop`.
inline RwaComparison compare_lab_and_rwa(const QOParams& qo, double T, int rwa_steps,
                                         int samples_per_period = 40, std::stop_token stop = {}) {
  RwaComparison out;
  out.lab_steps = lab_frame_steps(qo, T, samples_per_period);
  PropagateOptions lab_opt;
  lab_opt.record_every = out.lab_steps;
  lab_opt.stop = stop;
  const Trajectory lab = propagate([&qo](double t) { return lab_hamiltonian(qo, t); },
                                   basis_state(1), T, out.lab_steps, lab_opt);
  PropagateOptions rwa_opt;
  rwa_opt.record_every = rwa_steps;
  const Trajectory rwa = propagate([&qo](double t) { return rwa_hamiltonian(qo, t); },
                                   basis_state(1), T, rwa_steps, rwa_opt);
  out.lab_populations = lab.populations.back();
  out.rwa_populations = rwa.populations.back();
  for (int k = 0; k < 4; ++k) {
    out.population_gap =
        std::max(out.population_gap, std::abs(out.lab_populations[k] - out.rwa_populations[k]));
  }
  return out;
}

// Full interaction-picture Hamiltonian with each driven element averaged over
// one period of its own carrier centred on t (midpoint rule, `samples` points).
// The counter-rotating part averages out exactly; what remains differs from
// the RWA form only through the Rabi variation inside the window, O(1/w).
inline Matrix4C averaged_interaction_hamiltonian(const QOParams& qo, double t, int samples = 2000) {
  Matrix4C out = interaction_picture_hamiltonian(qo, t);
  for (int k = 0; k < 4; ++k) {
    const auto [i, j] = kDiamondTransitions[k];
    const double window = 2.0 * std::numbers::pi / std::abs(qo.omega_fields[k]);
    Complex acc = 0.0;
    for (int n = 0; n < samples; ++n) {
      const double tau = t - 0.5 * window + window * (n + 0.5) / samples;
      acc += interaction_picture_hamiltonian(qo, tau)(i - 1, j - 1);
    }
    acc /= static_cast<double>(samples);
    out(i - 1, j - 1) = acc;
    out(j - 1, i - 1) = std::conj(acc);
  }
  return out;
}

}  // namespace fourlevel
