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

#include "jetcal/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>

#include "jetcal/error.hpp"
#include "jetcal/text.hpp"

namespace jetcal {

namespace {

std::string_view value_column(Unit unit) {
  switch (unit) {
    case Unit::mW: return "power_mw";
    case Unit::mA: return "current_ma";
    case Unit::V: return "voltage_v";
  }
  return "power_mw";
}

std::optional<Unit> unit_for_column(std::string_view column) {
  if (column == "power_mw") return Unit::mW;
  if (column == "current_ma") return Unit::mA;
  if (column == "voltage_v") return Unit::V;
  return std::nullopt;
}

class CsvReader {
 public:
  CsvReader(std::istream& in, std::string_view origin) : in_(in), origin_(origin) {}

  [[noreturn]] void fail(Errc code, const std::string& what) const {
    throw Error(code, origin_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  std::vector<std::string> header() {
    std::vector<std::string_view> cells;
    if (!next(cells)) {
      line_no_ = 1;
      fail(Errc::schema, "missing header row");
    }
    std::vector<std::string> out;
    for (auto c : cells) out.emplace_back(c);
    if (out.empty() || out.front() != "timestamp_us") {
      fail(Errc::schema, "first column must be timestamp_us");
    }
    return out;
  }

  // Next non-blank row split on commas; cells are trimmed.
  bool next(std::vector<std::string_view>& cells) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (text::trim(line_).empty()) continue;
      cells = text::split(line_, ',');
      for (auto& c : cells) c = text::trim(c);
      return true;
    }
    return false;
  }

  TimestampUs timestamp(std::string_view cell) {
    const auto ts = text::parse_int64(cell);
    if (!ts) fail(Errc::parse, "timestamp_us '" + std::string(cell) + "' is not an integer");
    if (*ts < 0) fail(Errc::parse, "negative timestamp");
    if (last_ts_ && *ts == *last_ts_) {
      fail(Errc::parse, "duplicate timestamp " + std::to_string(*ts));
    }
    if (last_ts_ && *ts < *last_ts_) {
      fail(Errc::parse, "timestamps not increasing (" + std::to_string(*ts) + " after " +
                            std::to_string(*last_ts_) + ")");
    }
    last_ts_ = *ts;
    return *ts;
  }

  double number(std::string_view cell, std::string_view column) const {
    const auto v = text::parse_number(cell);
    if (!v) fail(Errc::parse, "non-numeric " + std::string(column) + " '" + std::string(cell) + "'");
    return *v;
  }

  void expect_width(const std::vector<std::string_view>& cells, std::size_t width) const {
    if (cells.size() != width) {
      fail(Errc::parse, "expected " + std::to_string(width) + " columns, got " +
                            std::to_string(cells.size()));
    }
  }

 private:
  std::istream& in_;
  std::string origin_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::optional<TimestampUs> last_ts_;
};

PowerTrace read_values(CsvReader& reader, Unit unit, Source source, DeviceId device) {
  std::vector<PowerSample> samples;
  std::vector<std::string_view> cells;
  while (reader.next(cells)) {
    reader.expect_width(cells, 2);
    const auto ts = reader.timestamp(cells[0]);
    samples.push_back({ts, reader.number(cells[1], value_column(unit))});
  }
  return PowerTrace(std::move(device), source, unit, std::move(samples));
}

std::vector<DualChannelRecord> read_channels(CsvReader& reader) {
  std::vector<DualChannelRecord> records;
  std::vector<std::string_view> cells;
  while (reader.next(cells)) {
    reader.expect_width(cells, 3);
    DualChannelRecord r;
    r.timestamp_us = reader.timestamp(cells[0]);
    r.voltage_v = reader.number(cells[1], "voltage_v");
    r.clamp_current_a = reader.number(cells[2], "current_a");
    if (r.voltage_v < 0.0) reader.fail(Errc::parse, "negative supply voltage");
    records.push_back(r);
  }
  return records;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  return in;
}

}  // namespace

PowerTrace power_from_channels(std::span<const DualChannelRecord> records, int coil_turns,
                               DeviceId device) {
  if (coil_turns < 1) throw Error(Errc::invalid_argument, "coil_turns must be at least 1");
  std::vector<PowerSample> samples;
  samples.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i > 0 && r.timestamp_us <= records[i - 1].timestamp_us) {
      throw Error(Errc::invalid_argument,
                  "channel records not sorted by timestamp at index " + std::to_string(i));
    }
    const double current_a = r.clamp_current_a / static_cast<double>(coil_turns);
    samples.push_back({r.timestamp_us, r.voltage_v * current_a * 1000.0});
  }
  return PowerTrace(std::move(device), Source::external, Unit::mW, std::move(samples));
}

PowerTrace sum_rails(std::span<const RailReading> readings, DeviceId device) {
  std::vector<PowerSample> samples;
  samples.reserve(readings.size());
  std::set<std::string> rail_set;
  for (std::size_t i = 0; i < readings.size(); ++i) {
    const auto& r = readings[i];
    if (r.rails_mw.empty()) throw Error(Errc::schema, "rail reading without rails");
    std::set<std::string> names;
    double total = 0.0;
    for (const auto& [name, value] : r.rails_mw) {
      if (!std::isfinite(value) || value < 0.0) {
        throw Error(Errc::invalid_reading, "rail " + name + " has invalid value");
      }
      names.insert(name);
      total += value;
    }
    if (names.size() != r.rails_mw.size()) throw Error(Errc::schema, "duplicate rail name");
    if (i == 0) {
      rail_set = std::move(names);
    } else if (names != rail_set) {
      throw Error(Errc::schema, "rail set changes at reading " + std::to_string(i));
    }
    samples.push_back({r.timestamp_us, total});
  }
  return PowerTrace(std::move(device), Source::internal, Unit::mW, std::move(samples));
}

PowerTrace parse_value_csv(std::istream& in, Source source, DeviceId device,
                           std::string_view origin) {
  CsvReader reader(in, origin);
  const auto head = reader.header();
  const auto unit = head.size() == 2 ? unit_for_column(head[1]) : std::nullopt;
  if (!unit) reader.fail(Errc::schema, "unknown header; expected timestamp_us,power_mw");
  return read_values(reader, *unit, source, std::move(device));
}

ExternalData parse_external_csv(std::istream& in, DeviceId device, std::string_view origin) {
  CsvReader reader(in, origin);
  const auto head = reader.header();
  if (head.size() == 3 && head[1] == "voltage_v" && head[2] == "current_a") {
    return read_channels(reader);
  }
  if (head.size() == 2 && head[1] == "power_mw") {
    return read_values(reader, Unit::mW, Source::external, std::move(device));
  }
  reader.fail(Errc::schema,
              "unknown header; expected timestamp_us,voltage_v,current_a or timestamp_us,power_mw");
}

std::vector<RailReading> parse_rails_csv(std::istream& in, std::string_view origin) {
  CsvReader reader(in, origin);
  const auto head = reader.header();
  if (head.size() < 2) reader.fail(Errc::schema, "rails file needs at least one <rail>_mw column");
  std::vector<std::string> rails;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < head.size(); ++i) {
    const auto& col = head[i];
    if (col.size() <= 3 || !col.ends_with("_mw")) {
      reader.fail(Errc::schema, "rail column '" + col + "' must be named <rail>_mw");
    }
    auto name = col.substr(0, col.size() - 3);
    if (!seen.insert(name).second) reader.fail(Errc::schema, "duplicate rail '" + name + "'");
    rails.push_back(std::move(name));
  }

  std::vector<RailReading> readings;
  std::vector<std::string_view> cells;
  while (reader.next(cells)) {
    reader.expect_width(cells, head.size());
    RailReading r;
    r.timestamp_us = reader.timestamp(cells[0]);
    for (std::size_t i = 0; i < rails.size(); ++i) {
      const double v = reader.number(cells[i + 1], head[i + 1]);
      if (v < 0.0) reader.fail(Errc::parse, "negative rail power in " + head[i + 1]);
      r.rails_mw.emplace_back(rails[i], v);
    }
    readings.push_back(std::move(r));
  }
  return readings;
}

ParsedTrace parse_trace(const std::filesystem::path& path, TraceFormat format, int coil_turns,
                        DeviceId device) {
  auto in = open_input(path);
  const auto origin = path.string();
  switch (format) {
    case TraceFormat::internal_csv: {
      auto trace = parse_value_csv(in, Source::internal, std::move(device), origin);
      if (trace.unit() != Unit::mW) {
        throw Error(Errc::schema, origin + ": internal traces must use the power_mw column");
      }
      return trace;
    }
    case TraceFormat::external_csv: {
      auto data = parse_external_csv(in, device, origin);
      if (auto* records = std::get_if<std::vector<DualChannelRecord>>(&data)) {
        return power_from_channels(*records, coil_turns, std::move(device));
      }
      return std::get<PowerTrace>(std::move(data));
    }
    case TraceFormat::rails_csv:
      return parse_rails_csv(in, origin);
  }
  throw Error(Errc::invalid_argument, "unknown trace format");
}

PowerTrace load_power_trace(const std::filesystem::path& path, TraceFormat format, int coil_turns,
                            DeviceId device) {
  auto parsed = parse_trace(path, format, coil_turns, device);
  if (auto* readings = std::get_if<std::vector<RailReading>>(&parsed)) {
    return sum_rails(*readings, std::move(device));
  }
  return std::get<PowerTrace>(std::move(parsed));
}

void write_trace_csv(std::ostream& out, const PowerTrace& trace) {
  out << "timestamp_us," << value_column(trace.unit()) << '\n';
  for (const auto& s : trace.samples()) {
    out << s.timestamp_us << ',' << text::format_number(s.value) << '\n';
  }
}

void write_channels_csv(std::ostream& out, std::span<const DualChannelRecord> records) {
  out << "timestamp_us,voltage_v,current_a\n";
  for (const auto& r : records) {
    out << r.timestamp_us << ',' << text::format_number(r.voltage_v) << ','
        << text::format_number(r.clamp_current_a) << '\n';
  }
}

void write_rails_csv(std::ostream& out, std::span<const RailReading> readings) {
  if (readings.empty()) {
    throw Error(Errc::schema, "cannot write a rails file without rail names");
  }
  out << "timestamp_us";
  for (const auto& [name, _] : readings.front().rails_mw) out << ',' << name << "_mw";
  out << '\n';
  for (const auto& r : readings) {
    out << r.timestamp_us;
    for (const auto& [_, value] : r.rails_mw) out << ',' << text::format_number(value);
    out << '\n';
  }
}

void save_trace_csv(const std::filesystem::path& path, const PowerTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  write_trace_csv(out, trace);
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

}  // namespace jetcal
