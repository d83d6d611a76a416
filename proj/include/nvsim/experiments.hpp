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

#ifndef NVSIM_EXPERIMENTS_HPP
#define NVSIM_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "nvsim/core.hpp"

namespace nvsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

// Raised for malformed or inconsistent run configurations.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

const char* library_version();

struct ExperimentInfo {
  std::string tag;
  std::string description;
};
const std::vector<ExperimentInfo>& experiment_catalog();

// A run configuration:
//   {"experiment": tag, "seed": uint, "output_dir": path, "params": {...}}
// Parameter names carry their units (omega_mhz, tau_us, j_khz, ...). Values
// are converted to SI and angular frequencies once, when a run starts.
struct ExperimentConfig {
  std::string tag;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  nlohmann::ordered_json params;  // with defaults filled in
  nlohmann::ordered_json source;  // the document as read
};

// Every problem found without running anything. Parse errors carry
// line and column. Empty means valid.
std::vector<std::string> validate_config_text(const std::string& text);

// Throws ConfigError listing all diagnostics.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  nlohmann::ordered_json config;
  std::string version;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<OutputFile> files;
  nlohmann::ordered_json summary;
};

// Writes the CSV files and summary.json into cfg.output_dir, then
// manifest.json. Outputs other than the manifest depend only on the config.
RunManifest run_experiment(const ExperimentConfig& cfg);

std::string sha256_hex(const std::filesystem::path& file);

// Re-hashes every file listed in a manifest. Returns false and fills `why` on
// the first mismatch.
bool verify_manifest(const std::filesystem::path& manifest, std::string* why = nullptr);

}  // namespace nvsim

#endif  // NVSIM_EXPERIMENTS_HPP
