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

#include "jetcal/trace.hpp"

#include <cctype>
#include <cmath>

#include "jetcal/error.hpp"
#include "jetcal/text.hpp"

namespace jetcal {

DeviceId::DeviceId(std::string_view name) : name_(text::to_lower(text::trim(name))) {
  if (name_.empty()) throw Error(Errc::invalid_argument, "device id must not be empty");
  for (char c : name_) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && c != '-' && c != '_' && c != '.') {
      throw Error(Errc::invalid_argument, "invalid character in device id '" + name_ + "'");
    }
  }
}

std::string_view to_string(Source source) noexcept {
  switch (source) {
    case Source::internal: return "internal";
    case Source::external: return "external";
    case Source::calibrated: return "calibrated";
  }
  return "unknown";
}

std::string_view to_string(Unit unit) noexcept {
  switch (unit) {
    case Unit::mW: return "mW";
    case Unit::mA: return "mA";
    case Unit::V: return "V";
  }
  return "?";
}

PowerTrace::PowerTrace(DeviceId device, Source source, Unit unit, std::vector<PowerSample> samples)
    : device_(std::move(device)), source_(source), unit_(unit), samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.value)) {
      throw Error(Errc::invalid_reading, "non-finite value at sample " + std::to_string(i));
    }
    if (s.timestamp_us < 0) {
      throw Error(Errc::invalid_argument, "negative timestamp at sample " + std::to_string(i));
    }
    if (i > 0 && s.timestamp_us <= samples_[i - 1].timestamp_us) {
      throw Error(Errc::invalid_argument,
                  "timestamps not strictly increasing at sample " + std::to_string(i));
    }
  }
}

}  // namespace jetcal
