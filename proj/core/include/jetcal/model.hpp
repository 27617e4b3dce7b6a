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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "jetcal/trace.hpp"

namespace jetcal {

enum class Provenance { builtin, fitted };

std::string_view to_string(Provenance p) noexcept;

/// Linear map from an internal sensor reading to true input power:
/// true_mw = slope * raw_mw + intercept_mw.
class CalibrationModel {
 public:
  /// Throws Errc::invalid_argument unless slope > 0, the intercept is finite
  /// and the stated error is a non-negative finite percentage.
  CalibrationModel(DeviceId device, double slope, double intercept_mw, double stated_error_pct,
                   Provenance provenance);

  const DeviceId& device() const noexcept { return device_; }
  double slope() const noexcept { return slope_; }
  double intercept_mw() const noexcept { return intercept_mw_; }
  double stated_error_pct() const noexcept { return stated_error_pct_; }
  Provenance provenance() const noexcept { return provenance_; }

  friend bool operator==(const CalibrationModel&, const CalibrationModel&) = default;

 private:
  DeviceId device_;
  double slope_;
  double intercept_mw_;
  double stated_error_pct_;
  Provenance provenance_;
};

/// Calibrated power for one raw reading. Throws Errc::invalid_reading for a
/// negative or non-finite input.
double apply(const CalibrationModel& model, double raw_mw);

/// The raw reading that `apply` maps onto `true_mw`.
double invert(const CalibrationModel& model, double true_mw);

enum class InvalidReadingPolicy { abort, skip };

/// Maps every sample of an internal-sensor trace through `apply`. The result
/// keeps the timestamps and is tagged Source::calibrated. Calibrated values
/// below zero are kept and flagged in the trace warnings.
PowerTrace apply_trace(const CalibrationModel& model, const PowerTrace& trace,
                       InvalidReadingPolicy policy = InvalidReadingPolicy::abort);

struct EnergyReport {
  double energy_mj = 0.0;
  std::int64_t duration_us = 0;
  double mean_power_mw = 0.0;
};

/// Trapezoidal energy of a milliwatt trace over its full span.
EnergyReport integrate_energy(const PowerTrace& trace);

/// Device-keyed model table. Lookups are case-insensitive.
class ModelRegistry {
 public:
  ModelRegistry() = default;

  /// The four published Jetson models.
  static ModelRegistry with_builtins();

  const CalibrationModel& get(std::string_view device) const;
  bool contains(std::string_view device) const;

  /// Inserts or replaces the model for its device.
  void add(CalibrationModel model);

  std::vector<std::string> ids() const;
  std::size_t size() const noexcept { return models_.size(); }

 private:
  std::map<std::string, CalibrationModel, std::less<>> models_;
};

// Model file: one record per line,
//   device=<id> slope=<f> intercept_mw=<f> error_pct=<f> provenance=<builtin|fitted>
// Blank lines and lines starting with '#' are ignored.
std::string format_model_record(const CalibrationModel& model);
CalibrationModel parse_model_record(std::string_view line);
std::vector<CalibrationModel> read_model_file(std::istream& in, std::string_view origin = "<stream>");
std::vector<CalibrationModel> load_model_file(const std::filesystem::path& path);
void write_model_file(std::ostream& out, const std::vector<CalibrationModel>& models);

}  // namespace jetcal
