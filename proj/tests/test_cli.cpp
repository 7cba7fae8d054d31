#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fourlevel/pipeline.hpp"

using namespace fourlevel;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kSource = FOURLEVEL_SOURCE_DIR;
const std::string kCli = FOURLEVEL_CLI_PATH;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fourlevel_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json bundled(const std::string& name) { return json::parse(slurp(kSource / "scenarios" / (name + ".json"))); }

fs::path write_scenario(const json& j, const std::string& name) {
  const fs::path p = scratch("scenarios") / (name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

int run_in_process(Command c, const fs::path& scenario, const fs::path& out, Overrides o = {}) {
  std::ostringstream log, err;
  return run(c, scenario.string(), out, o, log, err);
}

int run_cli(const std::string& args) {
  const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Scenario, BundledFilesParse) {
  for (const char* name : {"tripod", "diamond", "ntype"}) {
    EXPECT_NO_THROW(load_scenario((kSource / "scenarios" / (std::string(name) + ".json")).string())) << name;
  }
}

TEST(Scenario, StrictSchema) {
  json j = bundled("tripod");
  j["stpes"] = 2000;
  EXPECT_THROW(parse_scenario(j), ValidationError);

  j = bundled("tripod");
  j["target"]["b"] = {1, 1, 0, 0};
  EXPECT_THROW(parse_scenario(j), ValidationError);

  j = bundled("tripod");
  j["T"] = -1.0;
  EXPECT_THROW(parse_scenario(j), ValidationError);

  j = bundled("tripod");
  j["steps"] = 50;
  EXPECT_THROW(parse_scenario(j), ValidationError);

  j = bundled("diamond");
  j["target"].erase("theta1");
  EXPECT_THROW(parse_scenario(j), ValidationError);

  j = bundled("diamond");
  j["qo"]["field_phases"] = {0.1, 0, 0, 0};
  EXPECT_THROW(parse_scenario(j), ValidationError);

  j = bundled("tripod");
  j["config"] = "ladder";
  EXPECT_THROW(parse_scenario(j), ValidationError);

  j = bundled("tripod");
  j["phases"]["eps"] = {0, 0};
  EXPECT_THROW(parse_scenario(j), ValidationError);

  j = bundled("tripod");
  j["ansatz"]["family"] = "gaussian";
  EXPECT_THROW(parse_scenario(j), ValidationError);
}

TEST(Pipeline, SolveTrivialTarget) {
  json j = bundled("tripod");
  j["target"]["b"] = {1, 0, 0, 0};
  const fs::path out = scratch("solve_trivial");
  ASSERT_EQ(run_in_process(Command::Solve, write_scenario(j, "trivial"), out), kExitOk);
  const json sol = json::parse(slurp(out / "solution.json"));
  for (const auto& [k, v] : sol["angles_T"].items()) EXPECT_EQ(v.get<double>(), 0.0) << k;
  EXPECT_EQ(sol["final_residual"].get<double>(), 0.0);
}

TEST(Pipeline, TripodPopulations) {
  const fs::path out = scratch("tripod");
  ASSERT_EQ(run_in_process(Command::Simulate, kSource / "scenarios/tripod.json", out), kExitOk);
  std::string header;
  const auto rows = read_csv(out / "populations.csv", &header);
  EXPECT_EQ(header, "t,P1,P2,P3,P4,phi2,phi3,phi4,phase_ref");
  ASSERT_EQ(rows.size(), 2001u);
  const auto& last = rows.back();
  EXPECT_EQ(last[0], 1.0);
  EXPECT_NEAR(last[1], 0.0, 1e-6);
  for (int k = 2; k <= 4; ++k) EXPECT_NEAR(last[k], 1.0 / 3.0, 1e-6);
  for (int k = 5; k <= 7; ++k) EXPECT_NEAR(last[k], M_PI / 3, 1e-5);

  const auto c = read_csv(out / "couplings.csv", &header);
  EXPECT_EQ(header, "t,Omega12,Omega13,Omega14,Omega23,Omega24,Omega34");
  ASSERT_EQ(c.size(), rows.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c[i][0], rows[i][0]);
    EXPECT_EQ(c[i][4], 0.0);
    EXPECT_EQ(c[i][5], 0.0);
    EXPECT_EQ(c[i][6], 0.0);
  }
  // Uniform grid.
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i][0], i / 2000.0, 1e-12);
}

TEST(Pipeline, DiamondPopulationsAndPhase) {
  const fs::path out = scratch("diamond");
  ASSERT_EQ(run_in_process(Command::Simulate, kSource / "scenarios/diamond.json", out), kExitOk);
  const auto last = read_csv(out / "populations.csv").back();
  EXPECT_NEAR(last[1], 0.0, 1e-6);
  EXPECT_NEAR(last[2], 0.5, 1e-6);
  EXPECT_NEAR(last[3], 0.5, 1e-6);
  EXPECT_NEAR(last[4], 0.0, 1e-6);
  EXPECT_NEAR(last[6] - last[5], M_PI / 2, 1e-5);
}

TEST(Pipeline, NTypeFinalState) {
  const fs::path out = scratch("ntype");
  ASSERT_EQ(run_in_process(Command::Simulate, kSource / "scenarios/ntype.json", out), kExitOk);
  const auto last = read_csv(out / "populations.csv").back();
  EXPECT_NEAR(last[4], 1.0, 1e-6);
  EXPECT_NEAR(last[7], M_PI / 6, 1e-5);
}

TEST(Pipeline, QOMapOutputs) {
  const fs::path out = scratch("qomap");
  ASSERT_EQ(run_in_process(Command::QOMap, kSource / "scenarios/diamond.json", out), kExitOk);
  const json q = json::parse(slurp(out / "qomap.json"));
  EXPECT_LT(q["closure_residual"].get<double>(), 1e-10);
  EXPECT_LT(q["resonance_residual"].get<double>(), 1e-12);
  std::string header;
  const auto rows = read_csv(out / "rabi.csv", &header);
  EXPECT_EQ(header.substr(0, 26), "t,Omega12,Omega12_prime,Om");
  EXPECT_EQ(rows.size(), 2001u);
}

TEST(Pipeline, VerifyPasses) {
  for (const char* name : {"tripod", "diamond", "ntype"}) {
    const fs::path out = scratch(std::string("verify_") + name);
    EXPECT_EQ(run_in_process(Command::Verify, kSource / "scenarios" / (std::string(name) + ".json"), out),
              kExitOk)
        << name;
    const json v = json::parse(slurp(out / "verify.json"));
    EXPECT_TRUE(v["all_passed"].get<bool>());
    EXPECT_GE(v["checks"].size(), 9u);
  }
}

TEST(Pipeline, CsvFormatting) {
  const fs::path out = scratch("format");
  ASSERT_EQ(run_in_process(Command::Simulate, kSource / "scenarios/diamond.json", out), kExitOk);
  const std::string text = slurp(out / "populations.csv");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(fmt(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(fmt(-0.0), "0");
  EXPECT_EQ(fmt(1e-20), "1e-20");
}

TEST(Pipeline, ExitCodes) {
  const fs::path out = scratch("codes");

  json j = bundled("tripod");
  j["surprise"] = true;
  EXPECT_EQ(run_in_process(Command::Solve, write_scenario(j, "unknown_key"), out), kExitValidation);
  EXPECT_EQ(run_in_process(Command::Solve, kSource / "scenarios/missing.json", out), kExitValidation);

  j = bundled("diamond");
  j["target"]["theta1"] = M_PI / 4;  // singular for b = (0, 1/sqrt2, 1/sqrt2, 0)
  EXPECT_EQ(run_in_process(Command::Solve, write_scenario(j, "singular"), out), kExitSolver);

  // Fast relative phases on a coarse grid: unitary but inaccurate.
  j = bundled("tripod");
  j["phases"]["eps_prime"] = {300.0, -200.0, 500.0};
  j["steps"] = 100;
  EXPECT_EQ(run_in_process(Command::Simulate, write_scenario(j, "coarse"), out), kExitAccuracy);
  EXPECT_EQ(run_in_process(Command::Simulate, write_scenario(j, "coarse"), out, {20000, std::nullopt}),
            kExitOk);

  EXPECT_EQ(run_in_process(Command::QOMap, kSource / "scenarios/tripod.json", out), kExitValidation);
  EXPECT_EQ(run_in_process(Command::Solve, kSource / "scenarios/tripod.json", out, {50, std::nullopt}),
            kExitValidation);
}

TEST(Cli, ExitCodesFromTheBinary) {
  const fs::path out = scratch("cli");
  const std::string tri = (kSource / "scenarios/tripod.json").string();
  EXPECT_EQ(run_cli("solve --scenario " + tri + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "solution.json"));
  EXPECT_EQ(run_cli("simulate --scenario " + tri + " --out " + out.string() + " --steps 500"), 0);
  EXPECT_EQ(read_csv(out / "populations.csv").size(), 501u);
  EXPECT_EQ(run_cli("solve --scenario " + tri + " --out " + out.string() + " --steps 10"), 1);
  EXPECT_EQ(run_cli("frobnicate --scenario " + tri + " --out " + out.string()), 1);
  EXPECT_EQ(run_cli("solve --out " + out.string()), 1);
}

TEST(Cli, DeterministicOutput) {
  const std::string nt = (kSource / "scenarios/ntype.json").string();
  json j = bundled("ntype");
  j["target"].erase("ntype_seed");  // force the multi-start path
  const std::string unseeded = write_scenario(j, "ntype_unseeded").string();
  for (const std::string& sc : {nt, unseeded}) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    ASSERT_EQ(run_cli("simulate --scenario " + sc + " --out " + a.string() + " --seed 7"), 0);
    ASSERT_EQ(run_cli("simulate --scenario " + sc + " --out " + b.string() + " --seed 7"), 0);
    for (const char* f : {"couplings.csv", "populations.csv"}) {
      const std::string x = slurp(a / f), y = slurp(b / f);
      EXPECT_FALSE(x.empty());
      EXPECT_EQ(x, y) << f;
    }
  }
}
