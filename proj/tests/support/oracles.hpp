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

// Reference computations for the tests. Each one takes a different route
// from the library code it checks (long double accumulation, direct scans,
// raw normal equations) and must not call into the code under test.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "jetcal/trace.hpp"

namespace jetcal::oracle {

/// Mean of samples with timestamp in (t_i - window, t_i], by direct scan.
inline double window_mean(std::span<const PowerSample> samples, std::size_t i,
                          std::int64_t window_us) {
  const auto t = samples[i].timestamp_us;
  long double sum = 0.0L;
  std::size_t count = 0;
  for (std::size_t j = i + 1; j-- > 0;) {
    if (samples[j].timestamp_us <= t - window_us) break;
    sum += samples[j].value;
    ++count;
  }
  return static_cast<double>(sum / static_cast<long double>(count));
}

struct Line {
  double slope;
  double intercept;
};

/// Uncentered normal equations [n Sx; Sx Sxx][b a]' = [Sy Sxy]' solved by
/// Cramer's rule in long double.
inline Line normal_equations(std::span<const PowerPair> pairs) {
  long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pairs) {
    const long double x = p.internal_mw;
    const long double y = p.external_mw;
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const long double det = n * sxx - sx * sx;
  const long double slope = (n * sxy - sx * sy) / det;
  const long double intercept = (sxx * sy - sx * sxy) / det;
  return {static_cast<double>(slope), static_cast<double>(intercept)};
}

inline long double sum_squared_residuals(std::span<const PowerPair> pairs, long double slope,
                                         long double intercept) {
  long double ssr = 0;
  for (const auto& p : pairs) {
    const long double r = p.external_mw - (slope * p.internal_mw + intercept);
    ssr += r * r;
  }
  return ssr;
}

/// Piecewise trapezoid area in mJ, accumulated segment by segment.
inline double trapezoid_mj(std::span<const PowerSample> samples) {
  long double total = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const long double width_s =
        static_cast<long double>(samples[i].timestamp_us - samples[i - 1].timestamp_us) / 1e6L;
    const long double mean_w = (samples[i].value + samples[i - 1].value) / 2.0L / 1000.0L;
    total += mean_w * width_s * 1000.0L;  // J -> mJ
  }
  return static_cast<double>(total);
}

/// Value of the straight line through (t0, v0) and (t1, v1) at t.
inline double lerp_at(std::int64_t t0, double v0, std::int64_t t1, double v1, std::int64_t t) {
  const long double w1 = static_cast<long double>(t - t0) / static_cast<long double>(t1 - t0);
  return static_cast<double>((1.0L - w1) * v0 + w1 * v1);
}

inline double relative_error(double actual, double expected) {
  if (expected == 0.0) return std::abs(actual);
  return std::abs(actual - expected) / std::abs(expected);
}

}  // namespace jetcal::oracle
