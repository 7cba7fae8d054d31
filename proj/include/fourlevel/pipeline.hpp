#pragma once

// solve / simulate / qomap / verify pipelines behind the command-line tool.
// Each writes its files into an output directory and returns an exit status:
// 0 ok, 1 validation failure, 2 solver failure, 3 accuracy failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fourlevel/qo_map.hpp"
#include "fourlevel/scenario.hpp"

namespace fourlevel {

enum class Command { Solve, Simulate, QOMap, Verify };

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitSolver = 2, kExitAccuracy = 3, kExitInternal = 4 };

inline constexpr double kFidelityThreshold = 1.0 - 1e-6;
inline constexpr double kAnalyticTolerance = 1e-6;
inline constexpr double kClosureTolerance = 1e-10;
inline constexpr double kForbiddenTolerance = 1e-8;

struct Overrides {
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
};

// Raised by a pipeline when a numerical check fails after the run completed.
struct CheckFailure : AccuracyError {
  using AccuracyError::AccuracyError;
};

// ---------------------------------------------------------------------------
// Output formatting

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt(values[i]);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline nlohmann::json angles_json(const AnglePair& a) {
  return {{"gamma1", a.gamma1}, {"theta1", a.theta1}, {"phi1", a.phi1},
          {"gamma2", a.gamma2}, {"theta2", a.theta2}, {"phi2", a.phi2}};
}

// ---------------------------------------------------------------------------
// Shared pieces

inline Scenario apply_overrides(Scenario sc, const Overrides& o) {
  if (o.steps) sc.steps = *o.steps;
  if (o.seed) sc.seed = *o.seed;
  validate(sc);
  return sc;
}

inline SolvedAngles solve_scenario(const Scenario& sc) {
  NTypeOptions opt;
  opt.seed = sc.seed;
  return solve(sc.config, sc.target, sc.T, opt);
}

inline std::function<CouplingSet(double)> coupling_fn(const SolvedAngles& s) {
  return [s](double t) { return coupling_schedules(s, t); };
}

// K(T) b: the state the engineered evolution must reach from |1>.
inline StateVector target_state(const Scenario& sc) {
  return phase_operator(sc.phases, sc.T) * sc.target.b.cast<Complex>();
}

inline Trajectory simulate_scenario(const Scenario& sc, const SolvedAngles& s, int record_every = 1) {
  PropagateOptions opt;
  opt.record_every = record_every;
  return propagate(make_hamiltonian(coupling_fn(s), sc.phases), basis_state(1), sc.T, sc.steps, opt);
}

inline QOParams qo_for_scenario(const Scenario& sc, const SolvedAngles& s) {
  if (sc.config != LevelConfig::Diamond) {
    throw UnsupportedConfiguration("qomap: only the diamond configuration has a quantum-optical mapping");
  }
  if (!sc.qo) throw ValidationError("qomap: scenario has no \"qo\" section (omega_levels required)");
  return engineered_to_qo(coupling_fn(s), sc.phases, sc.qo->omega_levels, sc.qo->field_phases);
}

// max over a uniform grid of |H_RWA - H_total| entrywise.
inline double closure_residual(const QOParams& qo, const SolvedAngles& s, const PhaseSchedule& ph,
                               int grid = kConstraintGrid) {
  double worst = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double t = ph.horizon * i / grid;
    const Matrix4C d = rwa_hamiltonian(qo, t) - total_hamiltonian(coupling_schedules(s, t), ph, t);
    worst = std::max(worst, d.cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Commands

inline void run_solve(const Scenario& sc, const std::filesystem::path& out, std::ostream& log) {
  const SolvedAngles s = solve_scenario(sc);
  nlohmann::json j;
  j["config"] = to_string(sc.config);
  if (!sc.name.empty()) j["name"] = sc.name;
  j["T"] = sc.T;
  j["angles_T"] = angles_json(s.boundary);
  j["ansatz"] = sc.ansatz;
  j["branch"] = s.branch;
  j["final_residual"] = s.final_residual;
  j["constraint_residual"] = s.constraint_residual;
  j["range_report"] = range_report(s.boundary);
  write_json(out / "solution.json", j);
  log << "solved " << to_string(sc.config) << " (" << s.branch << "), residual " << fmt(s.final_residual)
      << '\n';
}

inline void run_simulate(const Scenario& sc, const std::filesystem::path& out, std::ostream& log) {
  const SolvedAngles s = solve_scenario(sc);
  const Trajectory tr = simulate_scenario(sc, s);

  CsvWriter cw(out / "couplings.csv", {"t", "Omega12", "Omega13", "Omega14", "Omega23", "Omega24", "Omega34"});
  CsvWriter pw(out / "populations.csv", {"t", "P1", "P2", "P3", "P4", "phi2", "phi3", "phi4", "phase_ref"});
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times[i];
    const auto c = coupling_schedules(s, t).as_array();
    cw.row({t, c[0], c[1], c[2], c[3], c[4], c[5]});
    const auto& p = tr.populations[i];
    const auto& f = tr.phases[i];
    pw.row({t, p[0], p[1], p[2], p[3], f[0], f[1], f[2], tr.phase_relative[i] ? 1.0 : 0.0});
  }

  const double fid = fidelity(tr.final_state(), target_state(sc), false);
  log << "simulated " << tr.size() - 1 << " steps, norm drift " << fmt(tr.norm_drift) << ", fidelity "
      << fmt(fid) << '\n';
  if (fid < kFidelityThreshold) {
    throw CheckFailure("fidelity " + fmt(fid) + " below " + fmt(kFidelityThreshold) +
                       "; increase --steps");
  }
}

inline void run_qomap(const Scenario& sc, const std::filesystem::path& out, std::ostream& log) {
  const SolvedAngles s = solve_scenario(sc);
  const QOParams qo = qo_for_scenario(sc, s);
  const double closure = closure_residual(qo, s, sc.phases);
  const auto det = rwa_detunings(qo);

  nlohmann::json j;
  j["omega_levels"] = qo.omega_levels;
  j["omega_fields"] = {{"w12", qo.omega_fields[0]}, {"w13", qo.omega_fields[1]},
                       {"w24", qo.omega_fields[2]}, {"w34", qo.omega_fields[3]}};
  j["field_phases"] = qo.field_phases;
  j["detunings"] = {{"Delta_tilde2", det[0]}, {"Delta_tilde3", det[1]}, {"Delta_tilde4", det[2]}};
  j["resonance_residual"] = check_resonance(qo);
  j["closure_residual"] = closure;
  j["warnings"] = qo.warnings;
  write_json(out / "qomap.json", j);

  CsvWriter rw(out / "rabi.csv", {"t", "Omega12", "Omega12_prime", "Omega13", "Omega13_prime", "Omega24",
                                  "Omega24_prime", "Omega34", "Omega34_prime"});
  for (int i = 0; i <= sc.steps; ++i) {
    const double t = sc.T * i / sc.steps;
    const RabiSet r = qo.rabi(t);
    rw.row({t, r[0].real(), r[0].imag(), r[1].real(), r[1].imag(), r[2].real(), r[2].imag(), r[3].real(),
            r[3].imag()});
  }
  for (const auto& w : qo.warnings) log << "warning: " << w << '\n';
  log << "qomap closure " << fmt(closure) << ", resonance " << fmt(check_resonance(qo)) << '\n';
  if (closure > kClosureTolerance) {
    throw CheckFailure("RWA Hamiltonian differs from the engineered one by " + fmt(closure));
  }
}

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

inline std::vector<CheckResult> verify_checks(const Scenario& sc) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double value, double threshold, bool below = true, std::string detail = {}) {
    out.push_back({std::move(name), below ? value <= threshold : value >= threshold, value, threshold,
                   std::move(detail)});
  };

  const SolvedAngles s = solve_scenario(sc);
  add("solver_residual", s.final_residual, sc.config == LevelConfig::NType ? 1e-8 : 1e-9, true, s.branch);

  double forbidden = 0.0, numeric_vs_closed = 0.0, antisym = 0.0;
  for (int i = 0; i <= kConstraintGrid; ++i) {
    const double t = sc.T * i / kConstraintGrid;
    const CouplingEstimate e = hr_numeric(s.schedule, t);
    const auto num = e.couplings;
    for (const auto& [n, m] : forbidden_pairs(sc.config)) forbidden = std::max(forbidden, std::abs(num.at(n, m)));
    numeric_vs_closed = std::max(numeric_vs_closed, num.max_abs_difference(coupling_schedules(s, t)));
    antisym = std::max(antisym, e.antisymmetry_residual);
  }
  add("forbidden_couplings", forbidden, kForbiddenTolerance);
  add("closed_form_couplings", numeric_vs_closed, 1e-6);
  add("generator_antisymmetry", antisym, 1e-6);

  double herm = 0.0, eq3 = 0.0;
  const double h = 1e-5 * sc.T;
  for (int i = 1; i < kConstraintGrid; ++i) {
    const double t = sc.T * i / kConstraintGrid;
    const Matrix4C H = total_hamiltonian(coupling_schedules(s, t), sc.phases, t);
    herm = std::max(herm, (H - H.adjoint()).cwiseAbs().maxCoeff());
    eq3 = std::max(eq3, (H - hamiltonian_from_evolution(s.schedule, sc.phases, t, h)).cwiseAbs().maxCoeff());
  }
  add("hermiticity", herm, 1e-12);
  add("hamiltonian_from_evolution", eq3, 1e-5);

  const Trajectory tr = simulate_scenario(sc, s);
  add("norm_drift", tr.norm_drift, 1e-6);
  add("analytic_vs_numeric", compare_with_analytic(tr, s.schedule, sc.phases), kAnalyticTolerance);
  add("fidelity", fidelity(tr.final_state(), target_state(sc), false), kFidelityThreshold, false);

  if (sc.config == LevelConfig::Diamond && sc.qo) {
    const QOParams qo = qo_for_scenario(sc, s);
    add("four_photon_resonance", check_resonance(qo), 1e-12);
    add("rwa_closure", closure_residual(qo, s, sc.phases), kClosureTolerance);
  }
  return out;
}

inline void run_verify(const Scenario& sc, const std::filesystem::path& out, std::ostream& log) {
  const auto checks = verify_checks(sc);
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    log << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " = " << fmt(c.value) << " (threshold "
        << fmt(c.threshold) << ")" << (c.detail.empty() ? "" : " " + c.detail) << '\n';
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold}});
  }
  write_json(out / "verify.json", {{"config", to_string(sc.config)}, {"all_passed", all}, {"checks", arr}});
  if (!all) {
    std::string failed;
    for (const auto& c : checks) {
      if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
    }
    throw CheckFailure("verify: failing checks: " + failed);
  }
}

// Loads the scenario, runs one command and maps errors onto exit codes.
inline int run(Command cmd, const std::string& scenario_path, const std::filesystem::path& out_dir,
               const Overrides& overrides, std::ostream& log, std::ostream& err) {
  try {
    const Scenario sc = apply_overrides(load_scenario(scenario_path), overrides);
    std::filesystem::create_directories(out_dir);
    switch (cmd) {
      case Command::Solve: run_solve(sc, out_dir, log); break;
      case Command::Simulate: run_simulate(sc, out_dir, log); break;
      case Command::QOMap: run_qomap(sc, out_dir, log); break;
      case Command::Verify: run_verify(sc, out_dir, log); break;
    }
    return kExitOk;
  } catch (const InvalidArgument& e) {
    err << "validation failure: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UnsupportedConfiguration& e) {
    err << "validation failure: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ResonanceViolation& e) {
    err << "validation failure: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NoSolutionFound& e) {
    err << "solver failure: " << e.what() << " (best residual " << fmt(e.best_residual) << ")\n";
    return kExitSolver;
  } catch (const SingularParameterization& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const BranchError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ConstraintSingularity& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const AccuracyError& e) {
    err << "accuracy failure: " << e.what() << '\n';
    return kExitAccuracy;
  } catch (const InvalidHamiltonian& e) {
    err << "accuracy failure: " << e.what() << '\n';
    return kExitAccuracy;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

inline std::optional<Command> parse_command(const std::string& s) {
  if (s == "solve") return Command::Solve;
  if (s == "simulate") return Command::Simulate;
  if (s == "qomap") return Command::QOMap;
  if (s == "verify") return Command::Verify;
  return std::nullopt;
}

}  // namespace fourlevel
