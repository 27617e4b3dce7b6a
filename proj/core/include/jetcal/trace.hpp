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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jetcal {

/// Microseconds on the shared capture clock.
using TimestampUs = std::int64_t;

/// Canonical lowercase device identifier ("agx-orin", "nano", ...).
class DeviceId {
 public:
  DeviceId() : name_("unknown") {}
  explicit DeviceId(std::string_view name);

  const std::string& str() const noexcept { return name_; }

  friend bool operator==(const DeviceId&, const DeviceId&) = default;
  friend auto operator<=>(const DeviceId&, const DeviceId&) = default;

 private:
  std::string name_;
};

enum class Source { internal, external, calibrated };
enum class Unit { mW, mA, V };

std::string_view to_string(Source source) noexcept;
std::string_view to_string(Unit unit) noexcept;

struct PowerSample {
  TimestampUs timestamp_us = 0;
  double value = 0.0;

  friend bool operator==(const PowerSample&, const PowerSample&) = default;
};

/// Ordered sample sequence with strictly increasing timestamps. The sample
/// buffer is validated on construction and immutable afterwards.
class PowerTrace {
 public:
  PowerTrace() = default;
  PowerTrace(DeviceId device, Source source, Unit unit, std::vector<PowerSample> samples);

  const DeviceId& device() const noexcept { return device_; }
  Source source() const noexcept { return source_; }
  Unit unit() const noexcept { return unit_; }
  std::span<const PowerSample> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const PowerSample& operator[](std::size_t i) const { return samples_[i]; }

  /// Free-form notes attached by transformations (for example, negative
  /// calibrated values passed through).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string warning) { warnings_.push_back(std::move(warning)); }

  friend bool operator==(const PowerTrace& a, const PowerTrace& b) {
    return a.device_ == b.device_ && a.source_ == b.source_ && a.unit_ == b.unit_ &&
           a.samples_ == b.samples_;
  }

 private:
  DeviceId device_;
  Source source_ = Source::internal;
  Unit unit_ = Unit::mW;
  std::vector<PowerSample> samples_;
  std::vector<std::string> warnings_;
};

struct PowerPair {
  TimestampUs timestamp_us = 0;
  double internal_mw = 0.0;
  double external_mw = 0.0;
};

/// Time-aligned (internal, external) observations for one device.
struct PairedDataset {
  DeviceId device;
  std::vector<PowerPair> pairs;
};

}  // namespace jetcal
