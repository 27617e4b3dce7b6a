// Copyright 2026 The jetcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jetcal::text {

// Shortest decimal form that parses back to the identical double.
std::string format_number(double value);

std::optional<double> parse_number(std::string_view token);
std::optional<std::int64_t> parse_int64(std::string_view token);

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);

/// Parses `key=value key=value ...` (whitespace separated). Returns nullopt
/// on a token without '='.
std::optional<std::vector<std::pair<std::string, std::string>>> parse_key_values(
    std::string_view line);

}  // namespace jetcal::text
