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

// Seeded synthetic measurement campaigns: a "true power" profile, an
// internal-sensor stream derived from it through a calibration model's
// inverse, and a 1 ms external reference stream.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "jetcal/model.hpp"
#include "jetcal/trace.hpp"

namespace jetcal::synthetic {

inline constexpr TimestampUs kEpochBaseUs = 1'700'000'000'000'000;

/// Mixed steps and ramps between `lo_mw` and `hi_mw`.
class PowerProfile {
 public:
  PowerProfile(std::uint64_t seed, TimestampUs start_us, TimestampUs duration_us,
               double lo_mw = 5000.0, double hi_mw = 20000.0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<TimestampUs> seg_len(2'000'000, 8'000'000);
    std::uniform_real_distribution<double> level(lo_mw, hi_mw);
    std::bernoulli_distribution ramp(0.5);
    TimestampUs t = start_us;
    double current = level(rng);
    while (t < start_us + duration_us) {
      Segment s;
      s.start = t;
      s.end = t + seg_len(rng);
      s.from = current;
      s.to = level(rng);
      s.ramp = ramp(rng);
      current = s.to;
      segments_.push_back(s);
      t = s.end;
    }
  }

  double at(TimestampUs t) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](TimestampUs v, const Segment& s) { return v < s.end; });
    if (it == segments_.end()) return segments_.back().to;
    const auto& s = *it;
    if (!s.ramp) return s.to;  // step at segment start
    const double frac = static_cast<double>(t - s.start) / static_cast<double>(s.end - s.start);
    return s.from + (s.to - s.from) * frac;
  }

 private:
  struct Segment {
    TimestampUs start, end;
    double from, to;
    bool ramp;
  };
  std::vector<Segment> segments_;
};

struct Campaign {
  PowerTrace internal;
  PowerTrace external;
};

struct CampaignOptions {
  TimestampUs duration_us = 120'000'000;
  double internal_noise = 0.01;   // sigma as a fraction of the value
  double external_noise = 0.005;
  TimestampUs internal_min_dt_us = 1000;
  TimestampUs internal_max_dt_us = 10000;
  TimestampUs external_dt_us = 1000;
};

inline Campaign make_campaign(const CalibrationModel& model, std::uint64_t seed,
                              const CampaignOptions& opt = {}) {
  const PowerProfile truth(seed, kEpochBaseUs, opt.duration_us);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> unit_noise(0.0, 1.0);
  std::uniform_int_distribution<TimestampUs> dt(opt.internal_min_dt_us, opt.internal_max_dt_us);

  std::vector<PowerSample> internal;
  for (TimestampUs t = kEpochBaseUs; t <= kEpochBaseUs + opt.duration_us; t += dt(rng)) {
    const double raw = invert(model, truth.at(t));
    internal.push_back({t, raw * (1.0 + opt.internal_noise * unit_noise(rng))});
  }
  std::vector<PowerSample> external;
  for (TimestampUs t = kEpochBaseUs; t <= kEpochBaseUs + opt.duration_us; t += opt.external_dt_us) {
    external.push_back({t, truth.at(t) * (1.0 + opt.external_noise * unit_noise(rng))});
  }
  return {PowerTrace(model.device(), Source::internal, Unit::mW, std::move(internal)),
          PowerTrace(model.device(), Source::external, Unit::mW, std::move(external))};
}

/// Baseline current with a short excursion to `peak_ma` at `resolution_us`
/// spacing, mimicking a power-on transient.
inline PowerTrace boot_trace(double peak_ma, double baseline_ma = 150.0,
                             TimestampUs resolution_us = 100, std::size_t excursion_samples = 6) {
  std::vector<PowerSample> s;
  TimestampUs t = kEpochBaseUs;
  for (int i = 0; i < 200; ++i, t += resolution_us) s.push_back({t, 0.0});
  // rise, hold and decay around the peak
  const std::vector<double> shape = [&] {
    std::vector<double> v;
    for (std::size_t i = 0; i < excursion_samples; ++i) {
      const double mid = static_cast<double>(excursion_samples - 1) / 2.0;
      const double d = std::abs(static_cast<double>(i) - mid) / (mid + 1.0);
      v.push_back(1.0 - 0.5 * d);
    }
    v[excursion_samples / 2] = 1.0;
    return v;
  }();
  for (double f : shape) {
    s.push_back({t, peak_ma * f});
    t += resolution_us;
  }
  for (int i = 0; i < 2000; ++i, t += resolution_us) s.push_back({t, baseline_ma});
  return PowerTrace(DeviceId{}, Source::external, Unit::mA, std::move(s));
}

}  // namespace jetcal::synthetic
