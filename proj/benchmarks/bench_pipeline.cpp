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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "jetcal/model.hpp"
#include "jetcal/regression.hpp"
#include "jetcal/sensor.hpp"
#include "jetcal/signal.hpp"

namespace {

using namespace jetcal;

PowerTrace irregular(std::size_t n, std::uint64_t seed, Source source, std::int64_t max_dt) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> dt(1, max_dt);
  std::uniform_real_distribution<double> v(5000.0, 20000.0);
  std::vector<PowerSample> s;
  s.reserve(n);
  std::int64_t t = 0;
  for (std::size_t i = 0; i < n; ++i, t += dt(rng)) s.push_back({t, v(rng)});
  return PowerTrace(DeviceId("nano"), source, Unit::mW, std::move(s));
}

void BM_MovingAverageStream(benchmark::State& state) {
  const auto trace = irregular(static_cast<std::size_t>(state.range(0)), 1, Source::internal, 10000);
  for (auto _ : state) {
    MovingAverageFilter maf(kDefaultMafWindowUs);
    double acc = 0.0;
    for (const auto& s : trace.samples()) {
      if (auto out = maf.push(s)) acc += out->value;
    }
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MovingAverageStream)->Arg(10'000)->Arg(1'000'000);

void BM_Align(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto internal = irregular(n, 2, Source::internal, 10000);
  std::vector<PowerSample> ext;
  for (std::int64_t t = 0; t <= internal.samples().back().timestamp_us; t += 1000) {
    ext.push_back({t, 10000.0 + static_cast<double>(t % 997)});
  }
  const PowerTrace external(DeviceId("nano"), Source::external, Unit::mW, std::move(ext));
  for (auto _ : state) benchmark::DoNotOptimize(align(internal, external));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Align)->Arg(20'000)->Arg(200'000);

void BM_Fit(benchmark::State& state) {
  const auto& model = ModelRegistry::with_builtins().get("nano");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(4000.0, 18000.0);
  std::normal_distribution<double> z(0.0, 50.0);
  PairedDataset data;
  data.device = model.device();
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    const double xi = x(rng);
    data.pairs.push_back({i, xi, apply(model, xi) + z(rng)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit(data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fit)->Arg(20'000)->Arg(1'000'000);

void BM_ReplaySampleOnce(benchmark::State& state) {
  std::vector<PowerSample> s;
  for (std::int64_t i = 0; i < 10'000; ++i) s.push_back({i * 1000, 5000.0 + static_cast<double>(i % 100)});
  const PowerTrace trace(DeviceId("nano"), Source::internal, Unit::mW, std::move(s));
  const auto clock = realtime_clock();
  auto backend = replay_backend(trace, 1.0, clock);
  DeviceProfile profile;
  profile.device = DeviceId("nano");
  profile.backend = BackendKind::replay;
  profile.node_paths = {"replay://board"};
  profile.rail_names = {"board"};
  for (auto _ : state) benchmark::DoNotOptimize(sample_once(profile, *backend, clock));
}
BENCHMARK(BM_ReplaySampleOnce);

}  // namespace

BENCHMARK_MAIN();
