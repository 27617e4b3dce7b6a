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

#include "jetcal/regression.hpp"

#include <algorithm>
#include <cmath>

#include "jetcal/error.hpp"
#include "jetcal/text.hpp"

namespace jetcal {

namespace {

void check_pairs(const PairedDataset& data) {
  for (const auto& p : data.pairs) {
    if (!std::isfinite(p.internal_mw) || !std::isfinite(p.external_mw) || p.internal_mw < 0.0 ||
        p.external_mw < 0.0) {
      throw Error(Errc::invalid_reading,
                  "paired readings must be finite and non-negative (t=" +
                      std::to_string(p.timestamp_us) + " us)");
    }
  }
}

}  // namespace

LineFit least_squares(const PairedDataset& data) {
  const auto n = data.pairs.size();
  if (n < 2) throw Error(Errc::insufficient_data, "fitting needs at least 2 pairs");
  check_pairs(data);

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : data.pairs) {
    mean_x += p.internal_mw;
    mean_y += p.external_mw;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : data.pairs) {
    const double dx = p.internal_mw - mean_x;
    sxx += dx * dx;
    sxy += dx * (p.external_mw - mean_y);
  }
  if (!(sxx > 0.0)) {
    throw Error(Errc::degenerate_data, "internal readings have zero variance");
  }
  LineFit line;
  line.slope = sxy / sxx;
  line.intercept = mean_y - line.slope * mean_x;
  return line;
}

FitReport fit(const PairedDataset& data, double low_power_floor_mw) {
  const auto line = least_squares(data);
  if (!(line.slope > 0.0)) {
    throw SuspiciousFitError(line.slope, line.intercept,
                             "fitted slope " + text::format_number(line.slope) +
                                 " is not positive; check that the inputs are not swapped");
  }
  // Stated error is patched in once metrics exist.
  CalibrationModel provisional(data.device, line.slope, line.intercept, 0.0, Provenance::fitted);
  auto report = evaluate(provisional, data, low_power_floor_mw);
  report.model = CalibrationModel(data.device, line.slope, line.intercept, report.max_abs_err_pct,
                                  Provenance::fitted);
  return report;
}

FitReport evaluate(const CalibrationModel& model, const PairedDataset& data,
                   double low_power_floor_mw) {
  if (data.pairs.empty()) throw Error(Errc::insufficient_data, "evaluation needs data");
  check_pairs(data);

  FitReport report{model};
  double sum_err = 0.0;
  double sum_y = 0.0;
  for (const auto& p : data.pairs) {
    if (p.external_mw < low_power_floor_mw) {
      ++report.excluded_low_power;
      continue;
    }
    const double predicted = apply(model, p.internal_mw);
    const double err = std::abs(predicted - p.external_mw) / p.external_mw * 100.0;
    sum_err += err;
    report.max_abs_err_pct = std::max(report.max_abs_err_pct, err);
    sum_y += p.external_mw;
    ++report.n_samples;
  }
  if (report.n_samples == 0) {
    throw Error(Errc::no_evaluable_data, "every pair is below the low-power floor of " +
                                             text::format_number(low_power_floor_mw) + " mW");
  }
  report.mae_pct = sum_err / static_cast<double>(report.n_samples);

  const double mean_y = sum_y / static_cast<double>(report.n_samples);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& p : data.pairs) {
    if (p.external_mw < low_power_floor_mw) continue;
    const double r = p.external_mw - apply(model, p.internal_mw);
    const double d = p.external_mw - mean_y;
    ss_res += r * r;
    ss_tot += d * d;
  }
  if (ss_tot > 0.0) {
    report.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  } else {
    report.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
  }
  return report;
}

std::string format_fit_report(const FitReport& report) {
  return format_model_record(report.model) + "\n# metrics mae_pct=" +
         text::format_number(report.mae_pct) +
         " max_abs_err_pct=" + text::format_number(report.max_abs_err_pct) +
         " r_squared=" + text::format_number(report.r_squared) +
         " n_samples=" + std::to_string(report.n_samples) +
         " excluded_low_power=" + std::to_string(report.excluded_low_power) + "\n";
}

}  // namespace jetcal
