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

#include <cstddef>
#include <string>

#include "jetcal/model.hpp"
#include "jetcal/trace.hpp"

namespace jetcal {

/// Pairs whose external reading falls below this floor are left out of the
/// percentage metrics.
inline constexpr double kDefaultLowPowerFloorMw = 100.0;

struct FitReport {
  CalibrationModel model;
  double mae_pct = 0.0;
  double max_abs_err_pct = 0.0;
  double r_squared = 0.0;
  std::size_t n_samples = 0;           // pairs contributing to the metrics
  std::size_t excluded_low_power = 0;  // pairs below the floor
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of external on internal using centered sums.
/// Throws insufficient_data (n < 2) or degenerate_data (zero variance).
LineFit least_squares(const PairedDataset& data);

/// Fits a calibration model and validates it on the same data. The fitted
/// model's stated error is the worst per-pair error observed. Throws
/// SuspiciousFitError when the slope is not positive.
FitReport fit(const PairedDataset& data, double low_power_floor_mw = kDefaultLowPowerFloorMw);

/// Percentage error of `model` against the external readings. r_squared is
/// the coefficient of determination of the predictions, clamped to [0, 1].
FitReport evaluate(const CalibrationModel& model, const PairedDataset& data,
                   double low_power_floor_mw = kDefaultLowPowerFloorMw);

/// Model record followed by a `# metrics ...` line, so the output stays a
/// valid model file.
std::string format_fit_report(const FitReport& report);

}  // namespace jetcal
