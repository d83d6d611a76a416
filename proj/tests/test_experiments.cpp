// Copyright 2026 The nvsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "nvsim/experiments.hpp"

namespace nvsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nvsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult cli(const std::string& args, const fs::path& dir) {
  const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + NVSIM_CLI_PATH + "\" " + args + " >\"" + o.string() +
                          "\" 2>\"" + e.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

json small_fid(std::uint64_t seed, const fs::path& out) {
  return json{{"experiment", "fid"},
              {"seed", seed},
              {"output_dir", out.string()},
              {"params", {{"b_khz", 30.2}, {"tau_us", 2.5}, {"n_trajectories", 40}, {"t_max_us", 10.0},
                          {"n_points", 11}}}};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

TEST(Cli, ShippedConfigsValidate) {
  const auto dir = scratch("shipped");
  int count = 0;
  for (const auto& entry : fs::directory_iterator(NVSIM_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const auto r = cli("validate \"" + entry.path().string() + "\"", dir);
    EXPECT_EQ(r.code, kExitOk) << entry.path() << "\n" << r.err;
  }
  EXPECT_GE(count, 8);
}

TEST(Cli, EveryCatalogTagHasAShippedConfig) {
  for (const auto& info : experiment_catalog()) {
    EXPECT_TRUE(fs::exists(fs::path(NVSIM_CONFIG_DIR) / (info.tag + ".json"))) << info.tag;
  }
}

TEST(Cli, ListExperimentsPrintsTheCatalog) {
  const auto dir = scratch("list");
  const auto r = cli("list-experiments", dir);
  EXPECT_EQ(r.code, kExitOk);
  for (const auto& info : experiment_catalog()) EXPECT_TRUE(contains(r.out, info.tag)) << info.tag;
}

TEST(Cli, UsageErrorsExitWithOne) {
  const auto dir = scratch("usage");
  EXPECT_EQ(cli("", dir).code, kExitConfigError);
  EXPECT_EQ(cli("frobnicate", dir).code, kExitConfigError);
  EXPECT_EQ(cli("validate \"" + (dir / "absent.json").string() + "\"", dir).code, kExitConfigError);
  EXPECT_EQ(cli("--version", dir).code, kExitOk);
}

TEST(Cli, UnknownKeyNamesTheValidSet) {
  const auto dir = scratch("unknown");
  json doc = small_fid(1, dir / "out");
  doc["params"]["omega_mzh"] = 1.0;
  write(dir / "c.json", doc.dump());
  const auto r = cli("validate \"" + (dir / "c.json").string() + "\"", dir);
  EXPECT_EQ(r.code, kExitConfigError);
  EXPECT_TRUE(contains(r.err, "omega_mzh"));
  EXPECT_TRUE(contains(r.err, "valid keys"));
  EXPECT_TRUE(contains(r.err, "n_trajectories"));
}

TEST(Cli, MissingFieldNamesTheExperiment) {
  json doc = small_fid(1, "out");
  doc["params"].erase("tau_us");
  const auto diags = validate_config_text(doc.dump());
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_TRUE(contains(diags[0], "params.tau_us"));
  EXPECT_TRUE(contains(diags[0], "'fid'"));
}

TEST(Cli, ParseErrorsCarryLineAndColumn) {
  const auto diags = validate_config_text("{\n  \"experiment\": \"fid\",\n  \"seed\": ,\n}");
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_TRUE(contains(diags[0], "line 3")) << diags[0];
  EXPECT_TRUE(contains(diags[0], "column")) << diags[0];
}

TEST(Cli, UnknownTagListsTheCatalog) {
  json doc = small_fid(1, "out");
  doc["experiment"] = "fdi";
  const auto diags = validate_config_text(doc.dump());
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_TRUE(contains(diags[0], "valid tags"));
  EXPECT_TRUE(contains(diags[0], "t2-scan"));
}

TEST(Cli, TooCoarseStepNamesTheViolatedBound) {
  json doc = small_fid(1, "out");
  doc["params"]["dt_ns"] = 400.0;  // tau / 20 is 125 ns
  const auto diags = validate_config_text(doc.dump());
  ASSERT_FALSE(diags.empty());
  EXPECT_TRUE(contains(diags[0], "tau/20")) << diags[0];
}

TEST(Cli, TypeErrorsAreReported) {
  json doc = small_fid(1, "out");
  doc["params"]["n_trajectories"] = "many";
  doc["seed"] = -3;
  const auto diags = validate_config_text(doc.dump());
  EXPECT_EQ(diags.size(), 2u);
  EXPECT_THROW(parse_config(doc.dump()), ConfigError);
}

TEST(Run, RerunsAreByteIdentical) {
  const auto dir = scratch("rerun");
  write(dir / "a.json", small_fid(11, dir / "a").dump());
  write(dir / "b.json", small_fid(11, dir / "b").dump());
  ASSERT_EQ(cli("run \"" + (dir / "a.json").string() + "\"", dir).code, kExitOk);
  ASSERT_EQ(cli("run \"" + (dir / "b.json").string() + "\"", dir).code, kExitOk);
  for (const char* f : {"fid_analytic.csv", "fid_simulated.csv", "summary.json"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}

TEST(Run, SeedChangesOnlySimulatedOutputs) {
  const auto dir = scratch("seed");
  run_experiment(parse_config(small_fid(1, dir / "a").dump()));
  run_experiment(parse_config(small_fid(2, dir / "b").dump()));
  EXPECT_EQ(slurp(dir / "a" / "fid_analytic.csv"), slurp(dir / "b" / "fid_analytic.csv"));
  EXPECT_NE(slurp(dir / "a" / "fid_simulated.csv"), slurp(dir / "b" / "fid_simulated.csv"));
}

TEST(Run, ManifestRecordsAndDetectsTampering) {
  const auto dir = scratch("manifest");
  const auto m = run_experiment(parse_config(small_fid(4, dir / "o").dump()));
  const fs::path man = dir / "o" / "manifest.json";
  ASSERT_TRUE(fs::exists(man));
  EXPECT_EQ(m.seed, 4u);
  EXPECT_FALSE(m.version.empty());
  const json j = json::parse(slurp(man));
  EXPECT_EQ(j.at("config").at("experiment"), "fid");
  std::string why;
  EXPECT_TRUE(verify_manifest(man, &why)) << why;
  for (const auto& f : m.files) EXPECT_EQ(sha256_hex(dir / "o" / f.name), f.sha256) << f.name;
  {
    std::ofstream out(dir / "o" / "fid_simulated.csv", std::ios::app);
    out << "0,0,0\n";
  }
  EXPECT_FALSE(verify_manifest(man, &why));
  EXPECT_TRUE(contains(why, "fid_simulated.csv")) << why;
}

TEST(Run, CsvHeadersUseUnitSuffixes) {
  const auto dir = scratch("headers");
  run_experiment(parse_config(small_fid(4, dir / "o").dump()));
  std::istringstream in(slurp(dir / "o" / "fid_simulated.csv"));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t_s,observable,stderr");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 11);
}

TEST(Run, ConfigErrorsDuringRunExitWithOne) {
  const auto dir = scratch("badrun");
  json doc = small_fid(1, dir / "o");
  doc["params"]["n_points"] = 0;
  write(dir / "c.json", doc.dump());
  const auto r = cli("run \"" + (dir / "c.json").string() + "\"", dir);
  EXPECT_EQ(r.code, kExitConfigError) << r.err;
  EXPECT_FALSE(r.err.empty());
}

TEST(Run, UnwritableOutputIsARuntimeError) {
  const auto dir = scratch("unwritable");
  write(dir / "blocker", "file in the way");
  write(dir / "c.json", small_fid(1, dir / "blocker" / "sub").dump());
  const auto r = cli("run \"" + (dir / "c.json").string() + "\"", dir);
  EXPECT_EQ(r.code, kExitRuntimeError) << r.err;
}

TEST(Sha256, KnownDigest) {
  const auto dir = scratch("sha");
  write(dir / "abc", "abc");
  EXPECT_EQ(sha256_hex(dir / "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace nvsim
