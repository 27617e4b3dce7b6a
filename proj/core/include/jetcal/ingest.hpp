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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "jetcal/trace.hpp"

namespace jetcal {

/// Default turns of the sense coil the current clamp is wrapped around.
inline constexpr int kDefaultCoilTurns = 10;

/// One oscilloscope row: supply voltage plus the clamp reading taken around
/// the sense coil (so N times the conductor current).
struct DualChannelRecord {
  TimestampUs timestamp_us = 0;
  double voltage_v = 0.0;
  double clamp_current_a = 0.0;

  friend bool operator==(const DualChannelRecord&, const DualChannelRecord&) = default;
};

/// One multi-rail sensor snapshot. Rails keep their column order.
struct RailReading {
  TimestampUs timestamp_us = 0;
  std::vector<std::pair<std::string, double>> rails_mw;

  friend bool operator==(const RailReading&, const RailReading&) = default;
};

PowerTrace power_from_channels(std::span<const DualChannelRecord> records,
                               int coil_turns = kDefaultCoilTurns, DeviceId device = {});

/// Whole-board estimate for boards without a whole-board sensor.
PowerTrace sum_rails(std::span<const RailReading> readings, DeviceId device = {});

enum class TraceFormat { internal_csv, external_csv, rails_csv };

// CSV schemas (header row mandatory, integer microsecond timestamps):
//   single value : timestamp_us,power_mw   (also current_ma / voltage_v)
//   channels     : timestamp_us,voltage_v,current_a
//   rails        : timestamp_us,<rail>_mw[,<rail>_mw...]
// Errors name the origin and line number.

/// Single-value trace; the value column fixes the unit.
PowerTrace parse_value_csv(std::istream& in, Source source, DeviceId device = {},
                           std::string_view origin = "<stream>");

using ExternalData = std::variant<PowerTrace, std::vector<DualChannelRecord>>;

/// External export, either pre-computed power or raw voltage/current
/// channels, told apart by the header.
ExternalData parse_external_csv(std::istream& in, DeviceId device = {},
                                std::string_view origin = "<stream>");

std::vector<RailReading> parse_rails_csv(std::istream& in, std::string_view origin = "<stream>");

using ParsedTrace = std::variant<PowerTrace, std::vector<RailReading>>;

/// Reads a file in the declared format. Channel exports are converted to
/// power with `coil_turns`; rail files are returned unsummed.
ParsedTrace parse_trace(const std::filesystem::path& path, TraceFormat format,
                        int coil_turns = kDefaultCoilTurns, DeviceId device = {});

/// Like parse_trace, but always yields a power trace (rails are summed).
PowerTrace load_power_trace(const std::filesystem::path& path, TraceFormat format,
                            int coil_turns = kDefaultCoilTurns, DeviceId device = {});

void write_trace_csv(std::ostream& out, const PowerTrace& trace);
void write_channels_csv(std::ostream& out, std::span<const DualChannelRecord> records);
void write_rails_csv(std::ostream& out, std::span<const RailReading> readings);

void save_trace_csv(const std::filesystem::path& path, const PowerTrace& trace);

}  // namespace jetcal
