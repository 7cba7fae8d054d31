#pragma once

// Scenario files: strict JSON description of one state-preparation problem.
//
// {
//   "name": "tripod",                       optional label
//   "config": "tripod" | "diamond" | "ntype",
//   "T": 1.0,
//   "target": { "b": [b1, b2, b3, b4],
//               "theta1": 1.5707963267948966,      diamond only (required there)
//               "ntype_seed": [theta1, theta2, gamma2_T] },  ntype only (optional)
//   "phases": { "eps": [e2, e3, e4], "eps_prime": [e2', e3', e4'] },
//   "ansatz": { "family": "cosine_ramp" },  optional
//   "steps": 2000,                          optional, >= 100
//   "seed": 0,                              optional, N-type multi-start RNG
//   "qo": { "omega_levels": [w2, w3, w4],   optional, diamond only
//           "field_phases": [p12, p13, p24, p34] }
// }
//
// Angles in radians; times in the units of T. Unknown keys are rejected.

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "fourlevel/solvers.hpp"

namespace fourlevel {

struct ValidationError : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

struct QOSeed {
  std::array<double, 3> omega_levels{};
  std::array<double, 4> field_phases{0.0, 0.0, 0.0, 0.0};
};

struct Scenario {
  std::string name;
  LevelConfig config = LevelConfig::InverseTripod;
  TargetSpec target;
  double T = 1.0;
  PhaseSchedule phases;
  std::string ansatz = "cosine_ramp";
  int steps = kDefaultSteps;
  std::uint64_t seed = 0;
  std::optional<QOSeed> qo;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ValidationError(where + ": unknown key \"" + key + "\"");
  }
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(where + ": must be finite");
  return v;
}

template <std::size_t N>
std::array<double, N> numbers(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != N) {
    throw ValidationError(where + ": expected an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = number(j[i], where + "[" + std::to_string(i) + "]");
  return out;
}

inline LevelConfig parse_config(const json& j) {
  if (!j.is_string()) throw ValidationError("config: expected a string");
  const auto s = j.get<std::string>();
  if (s == "tripod") return LevelConfig::InverseTripod;
  if (s == "diamond") return LevelConfig::Diamond;
  if (s == "ntype") return LevelConfig::NType;
  throw ValidationError("config: unknown configuration \"" + s + "\" (tripod, diamond, ntype)");
}

}  // namespace detail

inline void validate(const Scenario& sc) {
  try {
    sc.target.validate();
  } catch (const InvalidArgument& e) {
    throw ValidationError(std::string("target: ") + e.what());
  }
  if (!(sc.T > 0.0)) throw ValidationError("T: must be positive");
  if (sc.steps < kMinSteps) throw ValidationError("steps: must be at least 100");
  if (sc.ansatz != "cosine_ramp") throw ValidationError("ansatz: only \"cosine_ramp\" is available");
  if (sc.config == LevelConfig::Diamond && !sc.target.theta1) {
    throw ValidationError("target.theta1: required for the diamond configuration");
  }
  if (sc.config != LevelConfig::Diamond && sc.target.theta1) {
    throw ValidationError("target.theta1: only meaningful for the diamond configuration");
  }
  if (sc.config != LevelConfig::NType && sc.target.ntype_seed) {
    throw ValidationError("target.ntype_seed: only meaningful for the ntype configuration");
  }
  if (sc.qo && sc.config != LevelConfig::Diamond) {
    throw ValidationError("qo: the quantum-optics mapping is only defined for the diamond configuration");
  }
  if (sc.qo) {
    const auto& p = sc.qo->field_phases;
    if (std::abs(p[0] - p[1] + p[2] - p[3]) > 1e-12) {
      throw ValidationError("qo.field_phases: must satisfy phi12 - phi13 + phi24 - phi34 = 0");
    }
  }
}

inline Scenario parse_scenario(const nlohmann::json& j) {
  using detail::number;
  using detail::numbers;
  detail::reject_unknown(j, {"name", "config", "T", "target", "phases", "ansatz", "steps", "seed", "qo"},
                         "scenario");
  for (const char* required : {"config", "T", "target", "phases"}) {
    if (!j.contains(required)) throw ValidationError(std::string("scenario: missing \"") + required + "\"");
  }
  Scenario sc;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ValidationError("name: expected a string");
    sc.name = j["name"].get<std::string>();
  }
  sc.config = detail::parse_config(j["config"]);
  sc.T = number(j["T"], "T");

  const auto& tj = j["target"];
  detail::reject_unknown(tj, {"b", "theta1", "ntype_seed"}, "target");
  if (!tj.contains("b")) throw ValidationError("target: missing \"b\"");
  const auto b = numbers<4>(tj["b"], "target.b");
  sc.target.b = Vector4R(b[0], b[1], b[2], b[3]);
  if (tj.contains("theta1")) sc.target.theta1 = number(tj["theta1"], "target.theta1");
  if (tj.contains("ntype_seed")) sc.target.ntype_seed = numbers<3>(tj["ntype_seed"], "target.ntype_seed");

  const auto& pj = j["phases"];
  detail::reject_unknown(pj, {"eps", "eps_prime"}, "phases");
  if (pj.contains("eps")) sc.phases.eps = numbers<3>(pj["eps"], "phases.eps");
  if (pj.contains("eps_prime")) sc.phases.eps_prime = numbers<3>(pj["eps_prime"], "phases.eps_prime");
  sc.phases.horizon = sc.T;

  if (j.contains("ansatz")) {
    const auto& aj = j["ansatz"];
    detail::reject_unknown(aj, {"family"}, "ansatz");
    if (!aj.contains("family") || !aj["family"].is_string()) {
      throw ValidationError("ansatz.family: expected a string");
    }
    sc.ansatz = aj["family"].get<std::string>();
  }
  if (j.contains("steps")) {
    if (!j["steps"].is_number_integer()) throw ValidationError("steps: expected an integer");
    sc.steps = j["steps"].get<int>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ValidationError("seed: expected a non-negative integer");
    sc.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("qo")) {
    const auto& qj = j["qo"];
    detail::reject_unknown(qj, {"omega_levels", "field_phases"}, "qo");
    if (!qj.contains("omega_levels")) throw ValidationError("qo: missing \"omega_levels\"");
    QOSeed q;
    q.omega_levels = numbers<3>(qj["omega_levels"], "qo.omega_levels");
    if (qj.contains("field_phases")) q.field_phases = numbers<4>(qj["field_phases"], "qo.field_phases");
    sc.qo = q;
  }
  validate(sc);
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

}  // namespace fourlevel
