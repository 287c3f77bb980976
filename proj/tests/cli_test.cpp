// Copyright 2026 The pathgibbs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pathgibbs_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(PATHGIBBS_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json simulate_config(const std::string& drift) {
  return Json{{"experiment", "simulate"},
              {"seed", 3},
              {"drift", Json::parse(drift)},
              {"sim", {{"n", 1}, {"steps", 50}, {"replicas", 2000}}},
              {"initial_law", {{"kind", "dirac"}, {"value", 0.0}}},
              {"output", {{"write_paths", false}}}};
}

TEST(Cli, ZeroDriftVarianceIsRecoverableFromFiles) {
  const fs::path dir = scratch("zero");
  Json cfg = simulate_config(R"({"kind": "zero"})");
  cfg["sim"]["replicas"] = 400;
  cfg["output"]["write_paths"] = true;
  ASSERT_EQ(run("simulate --config " + write_config(dir, cfg).string() + " --out " + (dir / "out").string()), 0);
  const Json manifest = Json::parse(slurp(dir / "out" / "manifest.json"));
  ASSERT_EQ(manifest["files"].size(), 400u);
  double s = 0.0, s2 = 0.0;
  for (const auto& f : manifest["files"]) {
    std::ifstream in(dir / "out" / f["path"].get<std::string>());
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("0,1,", 0) == 0) {
        const double x = std::stod(line.substr(4));
        s += x;
        s2 += x * x;
      }
    }
  }
  const double var = s2 / 400.0 - (s / 400.0) * (s / 400.0);
  EXPECT_NEAR(var, 1.0, 4.0 * std::sqrt(2.0 / 400.0));
  EXPECT_EQ(manifest["config_hash"].get<std::string>().size(), 40u);
  EXPECT_EQ(manifest["seed"], 3);
}

TEST(Cli, OrnsteinUhlenbeckVarianceMatchesClosedForm) {
  const fs::path dir = scratch("ou");
  const fs::path cfg = write_config(dir, simulate_config(R"({"kind": "ou", "kappa": 1.0})"));
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + dir.string()), 0);
  const Json m = Json::parse(slurp(dir / "manifest.json"));
  const auto& v = m["summary"]["origin_variance_at_1"];
  const double oracle = (1.0 - std::exp(-2.0)) / 2.0;
  EXPECT_NEAR(v["mean"].get<double>(), oracle, std::max(4.0 * v["stderr"].get<double>(), 0.02 * oracle));
}

TEST(Cli, RerunsAreByteIdentical) {
  const fs::path dir = scratch("rerun");
  Json cfg = simulate_config(R"({"kind": "barycentre_delay", "delay": 0.25, "beta_plus": 1, "beta_minus": -1})");
  cfg["sim"]["replicas"] = 20;
  cfg["output"]["write_paths"] = true;
  const std::string c = write_config(dir, cfg).string();
  ASSERT_EQ(run("simulate --config " + c + " --threads 1 --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run("simulate --config " + c + " --threads 4 --out " + (dir / "b").string()), 0);
  ASSERT_EQ(run("simulate --config " + c + " --seed 4 --out " + (dir / "c").string()), 0);
  EXPECT_EQ(slurp(dir / "a" / "manifest.json"), slurp(dir / "b" / "manifest.json"));
  EXPECT_EQ(slurp(dir / "a" / "replicas" / "replica_000007.csv"), slurp(dir / "b" / "replicas" / "replica_000007.csv"));
  EXPECT_NE(slurp(dir / "a" / "replicas" / "replica_000007.csv"), slurp(dir / "c" / "replicas" / "replica_000007.csv"));
  EXPECT_EQ(Json::parse(slurp(dir / "c" / "manifest.json"))["seed"], 4);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("codes");
  const std::string out = " --out " + dir.string();
  Json dlr{{"experiment", "dlr"},
           {"seed", 1},
           {"drift", {{"kind", "barycentre_delay"}, {"delay", 0.25}, {"beta_plus", 1}, {"beta_minus", -1}}},
           {"sim", {{"n", 2}, {"steps", 10}}},
           {"dlr", {{"outer", 10}, {"inner", 2}}}};
  EXPECT_EQ(run("dlr --config " + write_config(dir, dlr).string() + out), 2);  // Lambda^{++} leaves Lambda_n
  EXPECT_EQ(run("entropy --config " + write_config(dir, dlr).string() + out), 2);
  dlr["sim"]["typo"] = 1;
  EXPECT_EQ(run("dlr --config " + write_config(dir, dlr).string() + out), 2);
  EXPECT_EQ(run("dlr --config " + (dir / "missing.json").string() + out), 2);
  EXPECT_EQ(run("dlr" + out), 2);
  EXPECT_EQ(run("unknown-command"), 2);

  Json entropy{{"experiment", "entropy"},
               {"seed", 1},
               {"drift", {{"kind", "constant"}, {"c", 0.7}}},
               {"sim", {{"steps", 10}, {"replicas", 5}}},
               {"initial_law", {{"kind", "dirac"}}}};
  EXPECT_EQ(run("entropy --config " + write_config(dir, entropy).string() + out), 2);  // no density

  Json overflow{{"experiment", "simulate"},
                {"seed", 1},
                {"drift", {{"kind", "ou"}, {"kappa", -1e200}}},
                {"sim", {{"steps", 4}, {"replicas", 2}}},
                {"output", {{"write_paths", false}}}};
  EXPECT_EQ(run("simulate --config " + write_config(dir, overflow).string() + out), 3);

  Json fe{{"experiment", "free-energy"},
          {"seed", 1},
          {"drift", {{"kind", "constant"}, {"c", 0.0}}},
          {"sim", {{"n", 1}, {"steps", 10}, {"replicas", 50}}},
          {"free_energy", {{"simulation_drift", {{"kind", "constant"}, {"c", 2.0}}}}}};
  EXPECT_EQ(run("free-energy --config " + write_config(dir, fe).string() + out), 0);
  fe["free_energy"] = {{"offset", 0.5}};
  fe["drift"] = {{"kind", "ou"}, {"kappa", 1.0}};
  EXPECT_EQ(run("free-energy --config " + write_config(dir, fe).string() + out), 0);
  const Json rep = Json::parse(slurp(dir / "free_energy.json"));
  EXPECT_DOUBLE_EQ(rep["results"]["mismatch"]["mean"].get<double>(), 0.125);
}

TEST(Cli, StatisticalFailureExitsWithFour) {
  const fs::path dir = scratch("four");
  // An entropy agreement threshold of zero cannot be met by a noisy estimator.
  Json entropy{{"experiment", "entropy"},
               {"seed", 1},
               {"drift", {{"kind", "ou"}, {"kappa", 1.0}}},
               {"sim", {{"steps", 20}, {"replicas", 50}}},
               {"entropy", {{"sizes", {1}}, {"z_threshold", 0.0}}}};
  EXPECT_EQ(run("entropy --config " + write_config(dir, entropy).string() + " --out " + dir.string()), 4);
  const Json rep = Json::parse(slurp(dir / "entropy.json"));
  EXPECT_FALSE(rep["pass"].get<bool>());
  const std::string csv = slurp(dir / "entropy.csv");
  EXPECT_EQ(csv.rfind("config_hash,seed,n,", 0), 0u);
  EXPECT_NE(csv.find(rep["config_hash"].get<std::string>() + ",1,1,"), std::string::npos);
}

TEST(Cli, VerifyDrift) {
  const fs::path dir = scratch("verify");
  Json v{{"experiment", "verify-drift"},
         {"seed", 2},
         {"drift", {{"kind", "barycentre_delay"}, {"delay", 0.25}, {"beta_plus", 1}, {"beta_minus", -1}}},
         {"verify", {{"trials", 500}}}};
  EXPECT_EQ(run("verify-drift --config " + write_config(dir, v).string() + " --out " + dir.string()), 0);
  const Json rep = Json::parse(slurp(dir / "verify.json"));
  ASSERT_EQ(rep["results"].size(), 3u);
  for (const auto& r : rep["results"]) EXPECT_TRUE(r["pass"].get<bool>());
}

}  // namespace
