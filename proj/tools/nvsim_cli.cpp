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

// nvsim run <config> | validate <config> | list-experiments
// Exit codes: 0 ok, 1 configuration error, 2 runtime error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nvsim/experiments.hpp"
#include "nvsim/parallel.hpp"

namespace {

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::stringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

int cmd_validate(const std::string& path) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << path << ": cannot read file\n";
    return nvsim::kExitConfigError;
  }
  const auto diags = nvsim::validate_config_text(text);
  for (const auto& d : diags) std::cerr << path << ": " << d << '\n';
  if (!diags.empty()) return nvsim::kExitConfigError;
  std::cout << path << ": ok\n";
  return nvsim::kExitOk;
}

int cmd_run(const std::string& path, const std::string& output_override) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << path << ": cannot read file\n";
    return nvsim::kExitConfigError;
  }
  nvsim::ExperimentConfig cfg;
  try {
    cfg = nvsim::parse_config(text);
  } catch (const nvsim::ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return nvsim::kExitConfigError;
  }
  if (!output_override.empty()) cfg.output_dir = output_override;
  try {
    const auto m = nvsim::run_experiment(cfg);
    std::cout << cfg.tag << ": wrote " << m.files.size() << " files and manifest.json to "
              << cfg.output_dir.string() << " in " << m.wall_time_s << " s\n";
    std::cout << m.summary["results"].dump(2) << '\n';
  } catch (const nvsim::InvalidArgument& e) {
    std::cerr << cfg.tag << ": invalid input: " << e.what() << '\n';
    return nvsim::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << cfg.tag << ": runtime error: " << e.what() << '\n';
    return nvsim::kExitRuntimeError;
  }
  return nvsim::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV center array simulator"};
  app.set_version_flag("--version", nvsim::library_version());
  app.footer(std::string("Worker threads: set ") + nvsim::kWorkersEnv + ".");
  app.require_subcommand(1);

  std::string config;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config, "config file (JSON)")->required();
  run->add_option("-o,--output-dir", output_dir, "override output_dir from the config");
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config, "config file (JSON)")->required();
  auto* list = app.add_subcommand("list-experiments", "list experiment tags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? nvsim::kExitOk : nvsim::kExitConfigError;
  }

  if (*list) {
    for (const auto& info : nvsim::experiment_catalog()) {
      std::cout << info.tag << "\t" << info.description << '\n';
    }
    return nvsim::kExitOk;
  }
  if (*validate) return cmd_validate(config);
  if (*run) return cmd_run(config, output_dir);
  return nvsim::kExitConfigError;
}
