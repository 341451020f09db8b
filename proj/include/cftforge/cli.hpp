// Copyright 2026 The cft-forge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command-line entry point: subcommand wiring, YAML configuration and
// structured logging.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cftforge/teacher_client.hpp"

namespace cftforge::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitTransport = 2;

// Loaded from a YAML file:
//
//   cache_dir: .cft-cache
//   log_level: info
//   seed: 0
//   endpoints:
//     teacher:
//       base_url: https://api.example.com/v1
//       model: gpt-4o-2024-08-06
//       api_key_env: OPENAI_API_KEY   # name of the variable, never the key
//       max_parallel: 8
//       timeout_s: 300
//       max_retries: 5
//       retry_base_delay_ms: 1000
struct GlobalConfig {
  std::filesystem::path cache_dir = ".cft-cache";
  std::map<std::string, teacher::EndpointConfig, std::less<>> endpoints;
  std::string log_level = "info";
  std::uint64_t seed = 0;

  // Throws UsageError naming the missing profile.
  const teacher::EndpointConfig& endpoint(std::string_view name) const;
};

// Unknown keys and inline secrets are rejected with ValidationError.
GlobalConfig parse_config(std::string_view yaml_text);
GlobalConfig load_config(const std::filesystem::path& path);

enum class LogFormat { Text, Json };

// Installs the default spdlog logger writing to `sink`. Json emits one object
// per line: {"ts","level","msg"}.
void configure_logging(LogFormat format, std::string_view level, std::ostream& sink);

using TransportFactory =
    std::function<std::shared_ptr<teacher::ChatTransport>(const teacher::EndpointConfig&)>;

struct Environment {
  std::ostream* out = nullptr;  // stdout when null
  std::ostream* err = nullptr;  // stderr when null
  // Defaults to HttpTransport.
  TransportFactory transport;
  // Defaults to a real sleep.
  teacher::SleepFn sleep;
};

// args excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, const Environment& env = {});

}  // namespace cftforge::cli
