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

// Minimal RFC 4180 CSV reading and writing.

#include <string>
#include <string_view>
#include <vector>

namespace cftforge::csv {

using Row = std::vector<std::string>;

// Quoted fields may contain commas, doubled quotes and line breaks. CRLF and
// LF record terminators are both accepted; a trailing terminator does not
// produce an empty record. Throws ValidationError on an unterminated quote.
std::vector<Row> parse(std::string_view text);

// Quotes the field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

// One record terminated by "\n".
std::string format_row(const Row& row);

}  // namespace cftforge::csv
