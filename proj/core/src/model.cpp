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

#include "jetcal/model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "jetcal/error.hpp"
#include "jetcal/text.hpp"

namespace jetcal {

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::builtin ? "builtin" : "fitted";
}

CalibrationModel::CalibrationModel(DeviceId device, double slope, double intercept_mw,
                                   double stated_error_pct, Provenance provenance)
    : device_(std::move(device)),
      slope_(slope),
      intercept_mw_(intercept_mw),
      stated_error_pct_(stated_error_pct),
      provenance_(provenance) {
  if (!std::isfinite(slope_) || slope_ <= 0.0) {
    throw Error(Errc::invalid_argument,
                "calibration slope must be positive, got " + text::format_number(slope_));
  }
  if (!std::isfinite(intercept_mw_)) {
    throw Error(Errc::invalid_argument, "calibration intercept must be finite");
  }
  if (!std::isfinite(stated_error_pct_) || stated_error_pct_ < 0.0) {
    throw Error(Errc::invalid_argument, "stated error must be a non-negative percentage");
  }
}

double apply(const CalibrationModel& model, double raw_mw) {
  if (!std::isfinite(raw_mw) || raw_mw < 0.0) {
    throw Error(Errc::invalid_reading, "invalid raw reading " + text::format_number(raw_mw) + " mW");
  }
  return model.slope() * raw_mw + model.intercept_mw();
}

double invert(const CalibrationModel& model, double true_mw) {
  return (true_mw - model.intercept_mw()) / model.slope();
}

PowerTrace apply_trace(const CalibrationModel& model, const PowerTrace& trace,
                       InvalidReadingPolicy policy) {
  if (trace.source() != Source::internal) {
    throw Error(Errc::invalid_argument, "apply_trace expects an internal-sensor trace, got " +
                                            std::string(to_string(trace.source())));
  }
  if (trace.unit() != Unit::mW) {
    throw Error(Errc::unit_mismatch, "apply_trace expects a mW trace");
  }
  std::vector<PowerSample> out;
  out.reserve(trace.size());
  std::size_t skipped = 0;
  std::size_t negative = 0;
  for (const auto& s : trace.samples()) {
    if (!std::isfinite(s.value) || s.value < 0.0) {
      if (policy == InvalidReadingPolicy::skip) {
        ++skipped;
        continue;
      }
      throw Error(Errc::invalid_reading, "invalid raw reading " + text::format_number(s.value) +
                                             " mW at t=" + std::to_string(s.timestamp_us) + " us");
    }
    const double calibrated = apply(model, s.value);
    if (calibrated < 0.0) ++negative;
    out.push_back({s.timestamp_us, calibrated});
  }
  PowerTrace result(trace.device(), Source::calibrated, Unit::mW, std::move(out));
  if (skipped > 0) result.add_warning("skipped " + std::to_string(skipped) + " invalid readings");
  if (negative > 0) {
    result.add_warning(std::to_string(negative) + " calibrated values are negative");
  }
  return result;
}

EnergyReport integrate_energy(const PowerTrace& trace) {
  if (trace.size() < 2) {
    throw Error(Errc::insufficient_data, "energy integration needs at least 2 samples");
  }
  if (trace.unit() != Unit::mW) {
    throw Error(Errc::unit_mismatch, "energy integration expects a mW trace");
  }
  const auto samples = trace.samples();
  // mW * us = 1e-6 mJ
  double sum_mw_us = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const auto dt = static_cast<double>(samples[i + 1].timestamp_us - samples[i].timestamp_us);
    sum_mw_us += 0.5 * (samples[i].value + samples[i + 1].value) * dt;
  }
  EnergyReport report;
  report.duration_us = samples.back().timestamp_us - samples.front().timestamp_us;
  report.energy_mj = sum_mw_us * 1e-6;
  report.mean_power_mw = sum_mw_us / static_cast<double>(report.duration_us);
  return report;
}

ModelRegistry ModelRegistry::with_builtins() {
  ModelRegistry r;
  r.add(CalibrationModel(DeviceId("agx-orin"), 1.02, 3115.39, 3.0, Provenance::builtin));
  r.add(CalibrationModel(DeviceId("xavier-nx"), 1.10, 3130.41, 2.0, Provenance::builtin));
  r.add(CalibrationModel(DeviceId("tx2"), 0.90, 1998.80, 3.0, Provenance::builtin));
  r.add(CalibrationModel(DeviceId("nano"), 1.11, 232.60, 0.8, Provenance::builtin));
  return r;
}

const CalibrationModel& ModelRegistry::get(std::string_view device) const {
  const auto key = text::to_lower(text::trim(device));
  if (auto it = models_.find(key); it != models_.end()) return it->second;
  std::string available;
  for (const auto& id : ids()) {
    if (!available.empty()) available += ", ";
    available += id;
  }
  throw Error(Errc::unknown_device,
              "unknown device '" + std::string(device) + "' (available: " + available + ")");
}

bool ModelRegistry::contains(std::string_view device) const {
  return models_.find(text::to_lower(text::trim(device))) != models_.end();
}

void ModelRegistry::add(CalibrationModel model) {
  auto key = model.device().str();
  models_.insert_or_assign(std::move(key), std::move(model));
}

std::vector<std::string> ModelRegistry::ids() const {
  std::vector<std::string> out;
  out.reserve(models_.size());
  for (const auto& [id, _] : models_) out.push_back(id);
  return out;
}

std::string format_model_record(const CalibrationModel& model) {
  return "device=" + model.device().str() + " slope=" + text::format_number(model.slope()) +
         " intercept_mw=" + text::format_number(model.intercept_mw()) +
         " error_pct=" + text::format_number(model.stated_error_pct()) +
         " provenance=" + std::string(to_string(model.provenance()));
}

CalibrationModel parse_model_record(std::string_view line) {
  const auto kvs = text::parse_key_values(line);
  if (!kvs) throw Error(Errc::parse, "model record is not key=value pairs");
  std::optional<std::string> device;
  std::optional<double> slope, intercept, error_pct;
  std::optional<Provenance> provenance;
  for (const auto& [key, value] : *kvs) {
    auto number = [&](std::optional<double>& dst) {
      dst = text::parse_number(value);
      if (!dst) throw Error(Errc::parse, "non-numeric " + key + " '" + value + "'");
    };
    if (key == "device") {
      device = value;
    } else if (key == "slope") {
      number(slope);
    } else if (key == "intercept_mw") {
      number(intercept);
    } else if (key == "error_pct") {
      number(error_pct);
    } else if (key == "provenance") {
      if (value == "builtin") {
        provenance = Provenance::builtin;
      } else if (value == "fitted") {
        provenance = Provenance::fitted;
      } else {
        throw Error(Errc::parse, "unknown provenance '" + value + "'");
      }
    } else {
      throw Error(Errc::parse, "unknown model key '" + key + "'");
    }
  }
  if (!device || !slope || !intercept || !error_pct || !provenance) {
    throw Error(Errc::parse,
                "model record needs device, slope, intercept_mw, error_pct and provenance");
  }
  return CalibrationModel(DeviceId(*device), *slope, *intercept, *error_pct, *provenance);
}

std::vector<CalibrationModel> read_model_file(std::istream& in, std::string_view origin) {
  std::vector<CalibrationModel> models;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    try {
      models.push_back(parse_model_record(body));
    } catch (const Error& e) {
      throw Error(Errc::parse,
                  std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return models;
}

std::vector<CalibrationModel> load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open model file " + path.string());
  return read_model_file(in, path.string());
}

void write_model_file(std::ostream& out, const std::vector<CalibrationModel>& models) {
  for (const auto& m : models) out << format_model_record(m) << '\n';
}

}  // namespace jetcal
