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
#include <deque>
#include <optional>

#include "jetcal/trace.hpp"

namespace jetcal {

inline constexpr std::int64_t kDefaultMafWindowUs = 100'000;
inline constexpr std::int64_t kDefaultMaxGapUs = 10'000;

/// Incremental trailing moving average over a time window.
///
/// The value emitted for a sample at t is the mean of every pushed sample
/// with timestamp in (t - window, t]. Nothing is emitted until the stream has
/// covered one full window (t >= t0 + window). The running sum is
/// compensated and rebuilt from the window contents every
/// `kRecomputeInterval` pushes so that it cannot drift from the exact mean.
///
/// Single owner: may be moved between threads, never fed concurrently.
class MovingAverageFilter {
 public:
  static constexpr std::uint64_t kRecomputeInterval = 1'000'000;

  explicit MovingAverageFilter(std::int64_t window_us);

  /// Throws Errc::invalid_argument if `sample` does not advance time.
  std::optional<PowerSample> push(const PowerSample& sample);

  void reset();

  std::int64_t window_us() const noexcept { return window_us_; }
  std::size_t occupancy() const noexcept { return window_.size(); }

 private:
  void accumulate(double value);

  std::int64_t window_us_;
  std::deque<PowerSample> window_;
  double sum_ = 0.0;
  double compensation_ = 0.0;
  std::optional<TimestampUs> first_ts_;
  std::uint64_t pushes_since_recompute_ = 0;
};

/// Batch form of MovingAverageFilter. Warm-up samples are dropped.
PowerTrace moving_average(const PowerTrace& trace, std::int64_t window_us);

/// Pairs each internal sample with the external stream linearly interpolated
/// at the internal timestamp. A pair is emitted only when the internal
/// timestamp lies inside the external span and both bracketing external
/// samples are within `max_gap_us` of it.
PairedDataset align(const PowerTrace& internal, const PowerTrace& external,
                    std::int64_t max_gap_us = kDefaultMaxGapUs);

struct PeakReport {
  double peak_value = 0.0;
  TimestampUs peak_timestamp_us = 0;
  double baseline = 0.0;
  std::int64_t duration_above_threshold_us = 0;
  double threshold = 0.0;
};

/// Global maximum, median of sub-threshold samples, and total time at or
/// above `threshold`. Each sample accounts for the interval up to its
/// successor; the last sample reuses the preceding spacing.
PeakReport detect_peak(const PowerTrace& trace, double threshold);

}  // namespace jetcal
