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

#include "jetcal/error.hpp"

namespace jetcal {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::unknown_device: return "unknown-device";
    case Errc::invalid_reading: return "invalid-reading";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::degenerate_data: return "degenerate-data";
    case Errc::suspicious_fit: return "suspicious-fit";
    case Errc::empty_overlap: return "empty-overlap";
    case Errc::unit_mismatch: return "unit-mismatch";
    case Errc::baseline_undefined: return "baseline-undefined";
    case Errc::no_evaluable_data: return "no-evaluable-data";
    case Errc::parse: return "parse";
    case Errc::schema: return "schema";
    case Errc::sensor_read: return "sensor-read";
    case Errc::sampler_failed: return "sampler-failed";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace jetcal
