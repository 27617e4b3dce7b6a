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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "jetcal/ingest.hpp"
#include "jetcal/trace.hpp"

namespace jetcal {

enum class SensorMode { whole_board, sum_rails };
enum class NodeUnit { milliwatt, microwatt };
enum class BackendKind { sysfs, replay };

/// Where and how to read a board's built-in power sensor.
///
/// Text form, one `key = value` per line, `#` comments:
///
///   device     = nano
///   mode       = whole_board          (or sum_rails)
///   node       = /sys/.../in_power0_input
///   rail       = VDD_IN               (one per node, same order)
///   coil_turns = 10
///   unit       = mW                   (or uW)
///   backend    = sysfs                (or replay)
///   replay     = trace.csv            (replay only; relative to the profile)
///   time_scale = 1
///
/// A replay profile with mode=whole_board replays an internal power CSV; with
/// mode=sum_rails it replays a rails CSV whose columns match the rail names.
struct DeviceProfile {
  DeviceId device;
  SensorMode mode = SensorMode::whole_board;
  std::vector<std::filesystem::path> node_paths;
  std::vector<std::string> rail_names;
  int coil_turns = kDefaultCoilTurns;
  NodeUnit unit = NodeUnit::milliwatt;
  BackendKind backend = BackendKind::sysfs;
  std::filesystem::path replay_trace;
  double time_scale = 1.0;

  /// Throws Errc::invalid_argument when the invariants do not hold.
  void validate() const;
};

DeviceProfile parse_profile(std::istream& in, std::string_view origin = "<stream>",
                            const std::filesystem::path& base_dir = {});
DeviceProfile load_profile(const std::filesystem::path& path);

inline constexpr const char* kProfilePathEnv = "JETCAL_PROFILE_PATH";

/// Accepts a file path, or a name looked up as `<name>.profile` in the
/// colon-separated directories of $JETCAL_PROFILE_PATH.
DeviceProfile resolve_profile(std::string_view name_or_path);

/// Microseconds since the Unix epoch. Never goes backwards.
using MicrosClock = std::function<TimestampUs()>;
MicrosClock realtime_clock();

class SensorBackend {
 public:
  virtual ~SensorBackend() = default;
  virtual std::size_t node_count() const = 0;
  virtual std::string node_name(std::size_t index) const = 0;
  /// Current node contents. Throws Errc::sensor_read.
  virtual std::string read_node(std::size_t index) = 0;
};

/// Reads kernel sysfs nodes; each read reopens the node.
class SysfsBackend final : public SensorBackend {
 public:
  explicit SysfsBackend(std::vector<std::filesystem::path> nodes);

  std::size_t node_count() const override { return nodes_.size(); }
  std::string node_name(std::size_t index) const override;
  std::string read_node(std::size_t index) override;

 private:
  std::vector<std::filesystem::path> nodes_;
};

/// Virtual sensor nodes that follow recorded traces as time advances.
/// Trace time starts at the first trace sample when the backend is created
/// and advances at `time_scale` times the clock rate; each node holds the
/// latest sample at or before the current virtual time.
class ReplayBackend final : public SensorBackend {
 public:
  ReplayBackend(std::vector<PowerTrace> node_traces, std::vector<std::string> names,
                double time_scale, MicrosClock clock, NodeUnit unit = NodeUnit::milliwatt);

  std::size_t node_count() const override { return traces_.size(); }
  std::string node_name(std::size_t index) const override;
  std::string read_node(std::size_t index) override;

  TimestampUs virtual_time() const;

 private:
  std::vector<PowerTrace> traces_;
  std::vector<std::string> names_;
  double time_scale_;
  MicrosClock clock_;
  NodeUnit unit_;
  TimestampUs origin_real_ = 0;
  TimestampUs origin_virtual_ = 0;
};

std::unique_ptr<ReplayBackend> replay_backend(const PowerTrace& trace, double time_scale,
                                              MicrosClock clock = realtime_clock());

std::unique_ptr<SensorBackend> make_backend(const DeviceProfile& profile,
                                            MicrosClock clock = realtime_clock());

/// One whole-board reading in mW. The timestamp is taken before the first
/// node read and stands for every rail.
PowerSample sample_once(const DeviceProfile& profile, SensorBackend& backend,
                        const MicrosClock& clock = realtime_clock());

struct SamplerStats {
  std::uint64_t samples_taken = 0;
  std::uint64_t read_errors = 0;
  std::uint64_t dropped = 0;
  double achieved_rate_hz = 0.0;
  TimestampUs start_us = 0;
  TimestampUs end_us = 0;
};

inline constexpr double kMaxReadErrorRate = 0.10;
inline constexpr std::uint64_t kErrorRateMinAttempts = 100;

struct SamplerControl {
  std::optional<std::chrono::microseconds> duration;
  std::stop_token stop;
  /// Unthrottled when unset.
  std::optional<double> max_rate_hz;
};

using SampleSink = std::function<void(const PowerSample&)>;

/// Bounded single-producer/single-consumer handoff. A full buffer drops its
/// oldest sample so the producer never waits on the consumer.
class SampleChannel {
 public:
  explicit SampleChannel(std::size_t capacity);

  void push(const PowerSample& sample);
  /// Moves everything buffered into `out`, waiting up to `timeout` for the
  /// first sample. Returns false once closed and empty.
  bool drain(std::vector<PowerSample>& out, std::chrono::milliseconds timeout);
  void close();

  std::uint64_t dropped() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<PowerSample> buffer_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

/// Reads the sensor back-to-back until the duration elapses or a stop is
/// requested, delivering samples in strictly increasing timestamp order.
/// Read errors are counted; once the error rate exceeds kMaxReadErrorRate
/// (after kErrorRateMinAttempts attempts) the run aborts with
/// Errc::sampler_failed.
SamplerStats run_sampler(const DeviceProfile& profile, SensorBackend& backend,
                         const SampleSink& sink, const SamplerControl& control,
                         const MicrosClock& clock = realtime_clock());

/// Same, feeding `channel` and reporting its drops. The channel is closed
/// on return.
SamplerStats run_sampler(const DeviceProfile& profile, SensorBackend& backend,
                         SampleChannel& channel, const SamplerControl& control,
                         const MicrosClock& clock = realtime_clock());

}  // namespace jetcal
