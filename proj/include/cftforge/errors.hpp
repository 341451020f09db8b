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

#include <stdexcept>
#include <string>

namespace cftforge {

// Base of every error thrown by the library. The CLI maps subclasses to exit
// codes: TransportError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized record: missing field, wrong type, unknown enum tag.
class SchemaError : public ValidationError {
 public:
  SchemaError(std::string field, const std::string& detail)
      : ValidationError("schema error: field \"" + field + "\": " + detail),
        field_(std::move(field)),
        detail_(detail) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string field_;
  std::string detail_;
};

// Caller passed an argument combination the operation does not accept.
class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Retries exhausted against a transient failure (429, 5xx, timeout).
class TransportError : public Error {
 public:
  TransportError(int last_status, const std::string& what)
      : Error(what), last_status_(last_status) {}
  int last_status() const noexcept { return last_status_; }

 private:
  int last_status_;
};

// Non-retryable 4xx from the endpoint.
class RequestError : public Error {
 public:
  RequestError(int status, const std::string& what)
      : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

// Endpoint answered 200 but the body is not a chat-completions response.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace cftforge
