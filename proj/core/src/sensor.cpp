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

#include "jetcal/sensor.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <thread>

#include "jetcal/error.hpp"
#include "jetcal/text.hpp"

namespace jetcal {

namespace fs = std::filesystem;

void DeviceProfile::validate() const {
  if (node_paths.empty()) throw Error(Errc::invalid_argument, "profile has no sensor nodes");
  if (mode == SensorMode::whole_board && node_paths.size() != 1) {
    throw Error(Errc::invalid_argument, "whole_board profiles read exactly one node");
  }
  if (rail_names.size() != node_paths.size()) {
    throw Error(Errc::invalid_argument, "profile needs one rail name per node");
  }
  if (coil_turns < 1) throw Error(Errc::invalid_argument, "coil_turns must be at least 1");
  if (backend == BackendKind::replay) {
    if (replay_trace.empty()) throw Error(Errc::invalid_argument, "replay profile needs a trace");
    if (!(time_scale > 0.0) || !std::isfinite(time_scale)) {
      throw Error(Errc::invalid_argument, "time_scale must be positive");
    }
  }
}

DeviceProfile parse_profile(std::istream& in, std::string_view origin, const fs::path& base_dir) {
  DeviceProfile p;
  bool have_device = false;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> Error {
    return Error(Errc::invalid_argument,
                 std::string(origin) + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw fail("expected key = value");
    const std::string key = text::to_lower(text::trim(body.substr(0, eq)));
    const std::string value(text::trim(body.substr(eq + 1)));

    if (key == "device") {
      p.device = DeviceId(value);
      have_device = true;
    } else if (key == "mode") {
      if (value == "whole_board") {
        p.mode = SensorMode::whole_board;
      } else if (value == "sum_rails") {
        p.mode = SensorMode::sum_rails;
      } else {
        throw fail("mode must be whole_board or sum_rails");
      }
    } else if (key == "node") {
      p.node_paths.emplace_back(value);
    } else if (key == "rail") {
      p.rail_names.push_back(value);
    } else if (key == "coil_turns") {
      const auto turns = text::parse_int64(value);
      if (!turns || *turns < 1) throw fail("coil_turns must be a positive integer");
      p.coil_turns = static_cast<int>(*turns);
    } else if (key == "unit") {
      const auto u = text::to_lower(value);
      if (u == "mw") {
        p.unit = NodeUnit::milliwatt;
      } else if (u == "uw") {
        p.unit = NodeUnit::microwatt;
      } else {
        throw fail("unit must be mW or uW");
      }
    } else if (key == "backend") {
      if (value == "sysfs") {
        p.backend = BackendKind::sysfs;
      } else if (value == "replay") {
        p.backend = BackendKind::replay;
      } else {
        throw fail("backend must be sysfs or replay");
      }
    } else if (key == "replay") {
      fs::path trace(value);
      p.replay_trace = (trace.is_relative() && !base_dir.empty()) ? base_dir / trace : trace;
    } else if (key == "time_scale") {
      const auto scale = text::parse_number(value);
      if (!scale) throw fail("time_scale must be a number");
      p.time_scale = *scale;
    } else {
      throw fail("unknown profile key '" + key + "'");
    }
  }
  if (!have_device) throw Error(Errc::invalid_argument, std::string(origin) + ": missing device");

  if (p.backend == BackendKind::replay && p.node_paths.empty()) {
    if (p.rail_names.empty()) p.rail_names.push_back("board");
    for (const auto& rail : p.rail_names) p.node_paths.emplace_back("replay://" + rail);
  }
  if (p.rail_names.empty() && p.node_paths.size() == 1) p.rail_names.push_back("board");
  p.validate();
  return p;
}

DeviceProfile load_profile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open profile " + path.string());
  return parse_profile(in, path.string(), path.parent_path());
}

DeviceProfile resolve_profile(std::string_view name_or_path) {
  const fs::path direct(name_or_path);
  std::error_code ec;
  if (fs::is_regular_file(direct, ec)) return load_profile(direct);

  if (const char* env = std::getenv(kProfilePathEnv)) {
    for (auto dir : text::split(env, ':')) {
      if (dir.empty()) continue;
      for (const auto& candidate : {fs::path(dir) / (std::string(name_or_path) + ".profile"),
                                    fs::path(dir) / std::string(name_or_path)}) {
        if (fs::is_regular_file(candidate, ec)) return load_profile(candidate);
      }
    }
  }
  throw Error(Errc::io, "profile '" + std::string(name_or_path) + "' not found (searched " +
                            std::string(kProfilePathEnv) + ")");
}

MicrosClock realtime_clock() {
  using namespace std::chrono;
  const auto epoch_us = duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
  const auto steady_start = steady_clock::now();
  return [epoch_us, steady_start]() -> TimestampUs {
    return epoch_us + duration_cast<microseconds>(steady_clock::now() - steady_start).count();
  };
}

SysfsBackend::SysfsBackend(std::vector<fs::path> nodes) : nodes_(std::move(nodes)) {}

std::string SysfsBackend::node_name(std::size_t index) const { return nodes_.at(index).string(); }

std::string SysfsBackend::read_node(std::size_t index) {
  const auto& path = nodes_.at(index);
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) {
    throw Error(Errc::sensor_read, "cannot open sensor node " + path.string() + ": " +
                                       std::strerror(errno));
  }
  std::array<char, 64> buf{};
  const auto n = ::read(fd, buf.data(), buf.size() - 1);
  const int read_errno = errno;
  ::close(fd);
  if (n < 0) {
    throw Error(Errc::sensor_read,
                "cannot read sensor node " + path.string() + ": " + std::strerror(read_errno));
  }
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

ReplayBackend::ReplayBackend(std::vector<PowerTrace> node_traces, std::vector<std::string> names,
                             double time_scale, MicrosClock clock, NodeUnit unit)
    : traces_(std::move(node_traces)),
      names_(std::move(names)),
      time_scale_(time_scale),
      clock_(std::move(clock)),
      unit_(unit) {
  if (traces_.empty()) throw Error(Errc::invalid_argument, "replay needs at least one trace");
  if (names_.size() != traces_.size()) {
    throw Error(Errc::invalid_argument, "replay needs one name per trace");
  }
  if (!(time_scale_ > 0.0)) throw Error(Errc::invalid_argument, "time_scale must be positive");
  origin_virtual_ = std::numeric_limits<TimestampUs>::max();
  for (const auto& t : traces_) {
    if (t.empty()) throw Error(Errc::invalid_argument, "replay trace is empty");
    origin_virtual_ = std::min(origin_virtual_, t[0].timestamp_us);
  }
  origin_real_ = clock_();
}

std::string ReplayBackend::node_name(std::size_t index) const {
  return "replay://" + names_.at(index);
}

TimestampUs ReplayBackend::virtual_time() const {
  const auto elapsed = static_cast<double>(clock_() - origin_real_);
  return origin_virtual_ + static_cast<TimestampUs>(std::floor(elapsed * time_scale_));
}

std::string ReplayBackend::read_node(std::size_t index) {
  const auto& trace = traces_.at(index);
  const auto now = virtual_time();
  const auto samples = trace.samples();
  auto it = std::upper_bound(samples.begin(), samples.end(), now,
                             [](TimestampUs t, const PowerSample& s) { return t < s.timestamp_us; });
  const double value = it == samples.begin() ? samples.front().value : std::prev(it)->value;
  return text::format_number(unit_ == NodeUnit::microwatt ? value * 1000.0 : value) + "\n";
}

std::unique_ptr<ReplayBackend> replay_backend(const PowerTrace& trace, double time_scale,
                                              MicrosClock clock) {
  return std::make_unique<ReplayBackend>(std::vector<PowerTrace>{trace},
                                         std::vector<std::string>{"board"}, time_scale,
                                         std::move(clock));
}

std::unique_ptr<SensorBackend> make_backend(const DeviceProfile& profile, MicrosClock clock) {
  profile.validate();
  if (profile.backend == BackendKind::sysfs) {
    return std::make_unique<SysfsBackend>(profile.node_paths);
  }
  std::vector<PowerTrace> traces;
  if (profile.mode == SensorMode::whole_board) {
    traces.push_back(load_power_trace(profile.replay_trace, TraceFormat::internal_csv,
                                      kDefaultCoilTurns, profile.device));
  } else {
    auto parsed = parse_trace(profile.replay_trace, TraceFormat::rails_csv);
    const auto& readings = std::get<std::vector<RailReading>>(parsed);
    for (const auto& rail : profile.rail_names) {
      std::vector<PowerSample> samples;
      samples.reserve(readings.size());
      for (const auto& r : readings) {
        auto it = std::find_if(r.rails_mw.begin(), r.rails_mw.end(),
                               [&](const auto& kv) { return kv.first == rail; });
        if (it == r.rails_mw.end()) {
          throw Error(Errc::schema, "replay trace has no column for rail '" + rail + "'");
        }
        samples.push_back({r.timestamp_us, it->second});
      }
      traces.emplace_back(profile.device, Source::internal, Unit::mW, std::move(samples));
    }
  }
  // Node contents follow the profile unit so the normal read path applies.
  return std::make_unique<ReplayBackend>(std::move(traces), profile.rail_names, profile.time_scale,
                                         std::move(clock), profile.unit);
}

namespace {

double read_board_power(const DeviceProfile& profile, SensorBackend& backend) {
  double total = 0.0;
  const auto nodes = profile.mode == SensorMode::whole_board ? std::size_t{1} : backend.node_count();
  for (std::size_t i = 0; i < nodes; ++i) {
    const auto content = backend.read_node(i);
    const auto value = text::parse_number(content);
    if (!value) {
      throw Error(Errc::sensor_read, "non-numeric content in sensor node " + backend.node_name(i));
    }
    total += profile.unit == NodeUnit::microwatt ? *value / 1000.0 : *value;
  }
  return total;
}

void check_error_rate(std::uint64_t attempts, std::uint64_t errors) {
  if (static_cast<double>(errors) > kMaxReadErrorRate * static_cast<double>(attempts)) {
    throw Error(Errc::sampler_failed, "sensor read error rate " + std::to_string(errors) + "/" +
                                          std::to_string(attempts) + " exceeds 10%");
  }
}

}  // namespace

PowerSample sample_once(const DeviceProfile& profile, SensorBackend& backend,
                        const MicrosClock& clock) {
  const TimestampUs ts = clock();
  return {ts, read_board_power(profile, backend)};
}

SamplerStats run_sampler(const DeviceProfile& profile, SensorBackend& backend,
                         const SampleSink& sink, const SamplerControl& control,
                         const MicrosClock& clock) {
  if (backend.node_count() < profile.node_paths.size()) {
    throw Error(Errc::invalid_argument, "backend exposes fewer nodes than the profile lists");
  }
  if (control.max_rate_hz && !(*control.max_rate_hz > 0.0)) {
    throw Error(Errc::invalid_argument, "max rate must be positive");
  }

  SamplerStats stats;
  stats.start_us = clock();
  const TimestampUs deadline = control.duration
                                   ? stats.start_us + control.duration->count()
                                   : std::numeric_limits<TimestampUs>::max();
  std::optional<TimestampUs> last_ts;
  std::uint64_t attempts = 0;

  while (!control.stop.stop_requested()) {
    TimestampUs ts = clock();
    if (ts >= deadline) break;
    // Two reads inside one clock tick would share a timestamp.
    while (last_ts && ts <= *last_ts) ts = clock();

    ++attempts;
    double value = 0.0;
    try {
      value = read_board_power(profile, backend);
    } catch (const Error& e) {
      if (e.code() != Errc::sensor_read) throw;
      ++stats.read_errors;
      if (attempts >= kErrorRateMinAttempts) check_error_rate(attempts, stats.read_errors);
      continue;
    }
    sink(PowerSample{ts, value});
    last_ts = ts;
    ++stats.samples_taken;

    if (control.max_rate_hz) {
      const auto next = stats.start_us + static_cast<TimestampUs>(
                                             static_cast<double>(stats.samples_taken) * 1e6 /
                                             *control.max_rate_hz);
      const auto wait = next - clock();
      if (wait > 0) std::this_thread::sleep_for(std::chrono::microseconds(wait));
    }
  }

  stats.end_us = clock();
  if (attempts >= kErrorRateMinAttempts || stats.samples_taken == 0) {
    check_error_rate(attempts, stats.read_errors);
  }
  const auto elapsed_us = stats.end_us - stats.start_us;
  stats.achieved_rate_hz =
      elapsed_us > 0 ? static_cast<double>(stats.samples_taken) * 1e6 / static_cast<double>(elapsed_us)
                     : 0.0;
  return stats;
}

SamplerStats run_sampler(const DeviceProfile& profile, SensorBackend& backend,
                         SampleChannel& channel, const SamplerControl& control,
                         const MicrosClock& clock) {
  SamplerStats stats;
  try {
    stats = run_sampler(
        profile, backend, [&channel](const PowerSample& s) { channel.push(s); }, control, clock);
  } catch (...) {
    channel.close();
    throw;
  }
  channel.close();
  stats.dropped = channel.dropped();
  return stats;
}

SampleChannel::SampleChannel(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error(Errc::invalid_argument, "channel capacity must be positive");
}

void SampleChannel::push(const PowerSample& sample) {
  {
    std::lock_guard lock(mutex_);
    if (buffer_.size() == capacity_) {
      buffer_.pop_front();
      ++dropped_;
    }
    buffer_.push_back(sample);
  }
  ready_.notify_one();
}

bool SampleChannel::drain(std::vector<PowerSample>& out, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  ready_.wait_for(lock, timeout, [this] { return !buffer_.empty() || closed_; });
  const bool had_data = !buffer_.empty();
  out.insert(out.end(), buffer_.begin(), buffer_.end());
  buffer_.clear();
  return had_data || !closed_;
}

void SampleChannel::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

std::uint64_t SampleChannel::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

}  // namespace jetcal
