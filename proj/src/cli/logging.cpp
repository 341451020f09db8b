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

#include <spdlog/sinks/base_sink.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <ctime>
#include <mutex>
#include <ostream>

#include "cftforge/cli.hpp"
#include "cftforge/core.hpp"
#include "cftforge/errors.hpp"

namespace cftforge::cli {
namespace {

std::string iso_millis(std::chrono::system_clock::time_point t) {
  const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(t);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t - secs).count();
  const std::time_t tt = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[40];
  const auto n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms));
  return buf;
}

class JsonLineSink final : public spdlog::sinks::base_sink<std::mutex> {
 public:
  explicit JsonLineSink(std::ostream& os) : os_(os) {}

 protected:
  void sink_it_(const spdlog::details::log_msg& msg) override {
    const auto level = spdlog::level::to_string_view(msg.level);
    Json j;
    j["ts"] = iso_millis(msg.time);
    j["level"] = std::string(level.data(), level.size());
    j["msg"] = std::string(msg.payload.data(), msg.payload.size());
    os_ << dump_line(j) << '\n';
  }
  void flush_() override { os_.flush(); }

 private:
  std::ostream& os_;
};

}  // namespace

void configure_logging(LogFormat format, std::string_view level, std::ostream& sink) {
  const auto lvl = spdlog::level::from_str(std::string(level));
  if (lvl == spdlog::level::off && level != "off") {
    throw UsageError("unknown log level \"" + std::string(level) + "\"");
  }
  spdlog::sink_ptr s;
  if (format == LogFormat::Json) {
    s = std::make_shared<JsonLineSink>(sink);
  } else {
    s = std::make_shared<spdlog::sinks::ostream_sink_mt>(sink);
    s->set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
  }
  auto logger = std::make_shared<spdlog::logger>("cft-forge", std::move(s));
  logger->set_level(lvl);
  logger->flush_on(spdlog::level::warn);
  spdlog::set_default_logger(std::move(logger));
}

}  // namespace cftforge::cli
