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

#include "jetcal/signal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "jetcal/error.hpp"

namespace jetcal {

MovingAverageFilter::MovingAverageFilter(std::int64_t window_us) : window_us_(window_us) {
  if (window_us_ <= 0) throw Error(Errc::invalid_argument, "moving-average window must be positive");
}

std::optional<PowerSample> MovingAverageFilter::push(const PowerSample& sample) {
  if (!window_.empty() && sample.timestamp_us <= window_.back().timestamp_us) {
    throw Error(Errc::invalid_argument, "moving-average input must have increasing timestamps");
  }
  if (!first_ts_) first_ts_ = sample.timestamp_us;

  const TimestampUs left_open = sample.timestamp_us - window_us_;
  while (!window_.empty() && window_.front().timestamp_us <= left_open) {
    accumulate(-window_.front().value);
    window_.pop_front();
  }
  if (window_.empty()) {
    sum_ = 0.0;
    compensation_ = 0.0;
  }
  window_.push_back(sample);
  accumulate(sample.value);

  if (++pushes_since_recompute_ >= kRecomputeInterval) {
    sum_ = 0.0;
    compensation_ = 0.0;
    for (const auto& s : window_) accumulate(s.value);
    pushes_since_recompute_ = 0;
  }

  if (sample.timestamp_us < *first_ts_ + window_us_) return std::nullopt;
  return PowerSample{sample.timestamp_us,
                     (sum_ + compensation_) / static_cast<double>(window_.size())};
}

// Neumaier summation: keeps the low-order bits lost when large values leave
// a window that now holds small ones.
void MovingAverageFilter::accumulate(double value) {
  const double t = sum_ + value;
  if (std::abs(sum_) >= std::abs(value)) {
    compensation_ += (sum_ - t) + value;
  } else {
    compensation_ += (value - t) + sum_;
  }
  sum_ = t;
}

void MovingAverageFilter::reset() {
  window_.clear();
  sum_ = 0.0;
  compensation_ = 0.0;
  first_ts_.reset();
  pushes_since_recompute_ = 0;
}

PowerTrace moving_average(const PowerTrace& trace, std::int64_t window_us) {
  if (trace.empty()) throw Error(Errc::insufficient_data, "moving average of an empty trace");
  MovingAverageFilter filter(window_us);
  std::vector<PowerSample> out;
  out.reserve(trace.size());
  for (const auto& s : trace.samples()) {
    if (auto smoothed = filter.push(s)) out.push_back(*smoothed);
  }
  PowerTrace result(trace.device(), trace.source(), trace.unit(), std::move(out));
  for (const auto& w : trace.warnings()) result.add_warning(w);
  return result;
}

PairedDataset align(const PowerTrace& internal, const PowerTrace& external,
                    std::int64_t max_gap_us) {
  if (internal.empty() || external.empty()) {
    throw Error(Errc::empty_overlap, "cannot align an empty trace");
  }
  if (internal.unit() != Unit::mW || external.unit() != Unit::mW) {
    throw Error(Errc::unit_mismatch, "alignment requires both traces in mW");
  }
  if (max_gap_us < 0) throw Error(Errc::invalid_argument, "max gap must be non-negative");

  const auto ext = external.samples();
  PairedDataset data;
  data.device = internal.device();

  std::size_t j = 0;  // ext[j].timestamp_us <= t for the current internal sample
  for (const auto& s : internal.samples()) {
    const TimestampUs t = s.timestamp_us;
    if (t < ext.front().timestamp_us) continue;
    if (t > ext.back().timestamp_us) break;
    while (j + 1 < ext.size() && ext[j + 1].timestamp_us <= t) ++j;

    const auto& left = ext[j];
    if (left.timestamp_us == t) {
      data.pairs.push_back({t, s.value, left.value});
      continue;
    }
    const auto& right = ext[j + 1];
    if (t - left.timestamp_us > max_gap_us || right.timestamp_us - t > max_gap_us) continue;
    const double frac = static_cast<double>(t - left.timestamp_us) /
                        static_cast<double>(right.timestamp_us - left.timestamp_us);
    data.pairs.push_back({t, s.value, left.value + (right.value - left.value) * frac});
  }

  if (data.pairs.empty()) {
    throw Error(Errc::empty_overlap, "internal and external traces have no aligned overlap");
  }
  return data;
}

PeakReport detect_peak(const PowerTrace& trace, double threshold) {
  if (trace.empty()) throw Error(Errc::insufficient_data, "peak detection on an empty trace");
  if (!std::isfinite(threshold)) throw Error(Errc::invalid_argument, "threshold must be finite");

  const auto samples = trace.samples();
  PeakReport report;
  report.threshold = threshold;
  report.peak_value = samples.front().value;
  report.peak_timestamp_us = samples.front().timestamp_us;

  std::vector<double> below;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.value > report.peak_value) {
      report.peak_value = s.value;
      report.peak_timestamp_us = s.timestamp_us;
    }
    if (s.value < threshold) {
      below.push_back(s.value);
      continue;
    }
    if (i + 1 < samples.size()) {
      report.duration_above_threshold_us += samples[i + 1].timestamp_us - s.timestamp_us;
    } else if (i > 0) {
      report.duration_above_threshold_us += s.timestamp_us - samples[i - 1].timestamp_us;
    }
  }

  if (below.empty()) {
    throw Error(Errc::baseline_undefined,
                "every sample is at or above the threshold; baseline is undefined");
  }
  const auto mid = below.size() / 2;
  std::nth_element(below.begin(), below.begin() + static_cast<std::ptrdiff_t>(mid), below.end());
  if (below.size() % 2 == 1) {
    report.baseline = below[mid];
  } else {
    const double upper = below[mid];
    const double lower = *std::max_element(below.begin(), below.begin() + static_cast<std::ptrdiff_t>(mid));
    report.baseline = 0.5 * (lower + upper);
  }
  return report;
}

}  // namespace jetcal
