#pragma once

// Physical (complex Hermitian) Hamiltonian from the rotation couplings and a
// linear schedule of relative phases, H = i dK/dt K^dag + K H_r K^dag.

#include <array>
#include <cmath>
#include <complex>
#include <functional>

#include "fourlevel/rotation_engine.hpp"

namespace fourlevel {

using Complex = std::complex<double>;
using Matrix4C = Eigen::Matrix4cd;
using Vector4C = Eigen::Vector4cd;

inline constexpr Complex kI{0.0, 1.0};

// Relative phases of levels 2..4, linear between eps (t = 0) and eps_prime (t = T).
struct PhaseSchedule {
  std::array<double, 3> eps{0.0, 0.0, 0.0};
  std::array<double, 3> eps_prime{0.0, 0.0, 0.0};
  double horizon = 1.0;

  // Constant detuning Delta_k = (eps'_k - eps_k) / T for level k in 1..4 (zero for k = 1).
  double detuning(int level) const {
    if (level == 1) return 0.0;
    check_level(level);
    return (eps_prime[level - 2] - eps[level - 2]) / horizon;
  }

  double phase(int level, double t) const {
    if (level == 1) return 0.0;
    check_level(level);
    // Exact endpoint values regardless of rounding in Delta * T.
    if (t == horizon) return eps_prime[level - 2];
    return eps[level - 2] + detuning(level) * t;
  }

 private:
  static void check_level(int level) {
    if (level < 1 || level > 4) throw InvalidArgument("PhaseSchedule: level must be 1..4");
  }
};

inline bool is_hermitian(const Matrix4C& h, double tol = 1e-12) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const Matrix4C& u, double tol = 1e-10) {
  return (u.adjoint() * u - Matrix4C::Identity()).cwiseAbs().maxCoeff() <= tol;
}

// K(t) = diag(1, e^{i phi_2}, e^{i phi_3}, e^{i phi_4}).
inline Matrix4C phase_operator(const PhaseSchedule& ph, double t) {
  Matrix4C k = Matrix4C::Zero();
  for (int n = 1; n <= 4; ++n) k(n - 1, n - 1) = std::polar(1.0, ph.phase(n, t));
  return k;
}

// Diagonal -Delta_k, and i e^{i(phi_n - phi_m)} Omega_nm above the diagonal.
inline Matrix4C total_hamiltonian(const CouplingSet& c, const PhaseSchedule& ph, double t) {
  Matrix4C h = Matrix4C::Zero();
  for (int n = 1; n <= 4; ++n) h(n - 1, n - 1) = -ph.detuning(n);
  for (int n = 1; n <= 4; ++n) {
    for (int m = n + 1; m <= 4; ++m) {
      const Complex e = kI * std::polar(1.0, ph.phase(n, t) - ph.phase(m, t)) * c.at(n, m);
      h(n - 1, m - 1) = e;
      h(m - 1, n - 1) = std::conj(e);
    }
  }
  return h;
}

// U(t) = K(t) U_r(t) K^dag(0).
inline Matrix4C analytic_evolution(const AngleSchedule& s, const PhaseSchedule& ph, double t) {
  const Matrix4C ur = ur_of_angles(s.value(t)).cast<Complex>();
  return phase_operator(ph, t) * ur * phase_operator(ph, 0.0).adjoint();
}

// i dU/dt U^dag from centred differences of analytic_evolution; needs h <= t <= T - h.
inline Matrix4C hamiltonian_from_evolution(const AngleSchedule& s, const PhaseSchedule& ph, double t,
                                           double h) {
  const Matrix4C du = (analytic_evolution(s, ph, t + h) - analytic_evolution(s, ph, t - h)) / (2.0 * h);
  return kI * du * analytic_evolution(s, ph, t).adjoint();
}

using HamiltonianFn = std::function<Matrix4C(double)>;

// t -> H(t) for a coupling waveform and a phase schedule.
inline HamiltonianFn make_hamiltonian(std::function<CouplingSet(double)> couplings,
                                      const PhaseSchedule& ph) {
  return [couplings = std::move(couplings), ph](double t) {
    return total_hamiltonian(couplings(t), ph, t);
  };
}

}  // namespace fourlevel
