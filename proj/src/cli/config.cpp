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

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "cftforge/cli.hpp"
#include "cftforge/errors.hpp"

namespace cftforge::cli {
namespace {

void reject_unknown(const YAML::Node& node, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (key == "api_key") {
      throw ValidationError(where + ": inline api_key is not accepted; set api_key_env to the name "
                                    "of an environment variable instead");
    }
    if (!allowed.contains(key)) throw ValidationError(where + ": unknown key \"" + key + "\"");
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError(where + ": invalid value");
  }
}

teacher::EndpointConfig parse_endpoint(const std::string& name, const YAML::Node& node) {
  const std::string where = "endpoints." + name;
  if (!node.IsMap()) throw ValidationError(where + ": expected a mapping");
  reject_unknown(node,
                 {"base_url", "model", "api_key_env", "max_parallel", "timeout_s", "max_retries",
                  "retry_base_delay_ms"},
                 where);
  teacher::EndpointConfig e;
  if (!node["base_url"]) throw ValidationError(where + ": missing base_url");
  if (!node["model"]) throw ValidationError(where + ": missing model");
  e.base_url = scalar<std::string>(node["base_url"], where + ".base_url");
  e.model = scalar<std::string>(node["model"], where + ".model");
  if (node["api_key_env"]) e.api_key_env = scalar<std::string>(node["api_key_env"], where + ".api_key_env");
  if (node["max_parallel"]) e.max_parallel = scalar<int>(node["max_parallel"], where + ".max_parallel");
  if (node["timeout_s"]) {
    e.timeout = std::chrono::milliseconds(
        static_cast<long long>(scalar<double>(node["timeout_s"], where + ".timeout_s") * 1000));
  }
  if (node["max_retries"]) e.max_retries = scalar<int>(node["max_retries"], where + ".max_retries");
  if (node["retry_base_delay_ms"]) {
    e.retry_base_delay =
        std::chrono::milliseconds(scalar<long long>(node["retry_base_delay_ms"], where + ".retry_base_delay_ms"));
  }
  e.validate();
  return e;
}

}  // namespace

const teacher::EndpointConfig& GlobalConfig::endpoint(std::string_view name) const {
  const auto it = endpoints.find(name);
  if (it == endpoints.end()) {
    throw UsageError("no endpoint profile \"" + std::string(name) +
                     "\"; define it in --config or pass --base-url and --model");
  }
  return it->second;
}

GlobalConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  GlobalConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ValidationError("config: expected a mapping at top level");
  reject_unknown(root, {"cache_dir", "log_level", "seed", "endpoints"}, "config");
  if (root["cache_dir"]) cfg.cache_dir = scalar<std::string>(root["cache_dir"], "cache_dir");
  if (root["log_level"]) cfg.log_level = scalar<std::string>(root["log_level"], "log_level");
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (const auto eps = root["endpoints"]) {
    if (!eps.IsMap()) throw ValidationError("endpoints: expected a mapping");
    for (const auto& kv : eps) {
      const auto name = kv.first.as<std::string>();
      cfg.endpoints.emplace(name, parse_endpoint(name, kv.second));
    }
  }
  return cfg;
}

GlobalConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace cftforge::cli
