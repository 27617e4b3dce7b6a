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

#include "cli/commands.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <variant>

#include "jetcal/error.hpp"
#include "jetcal/ingest.hpp"
#include "jetcal/model.hpp"
#include "jetcal/regression.hpp"
#include "jetcal/sensor.hpp"
#include "jetcal/signal.hpp"
#include "jetcal/text.hpp"

extern char** environ;

namespace jetcal::cli {

namespace fs = std::filesystem;

namespace {

/// A usage/config problem detected by the CLI itself (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ordered report; printed as key=value lines or as one JSON object per line.
class Report {
 public:
  using Value = std::variant<double, std::int64_t, std::string>;

  explicit Report(std::string event) : event_(std::move(event)) {}

  Report& add(std::string key, double v) { return put(std::move(key), v); }
  Report& add(std::string key, std::int64_t v) { return put(std::move(key), v); }
  Report& add(std::string key, std::uint64_t v) {
    return put(std::move(key), static_cast<std::int64_t>(v));
  }
  Report& add(std::string key, std::string v) { return put(std::move(key), std::move(v)); }

  void print(std::ostream& out, bool json) const {
    if (json) {
      nlohmann::ordered_json j;
      j["event"] = event_;
      for (const auto& [k, v] : fields_) {
        std::visit([&](const auto& x) { j[k] = x; }, v);
      }
      out << j.dump() << '\n';
      return;
    }
    for (const auto& [k, v] : fields_) {
      out << k << '=';
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, double>) {
              out << text::format_number(x);
            } else {
              out << x;
            }
          },
          v);
      out << '\n';
    }
  }

 private:
  Report& put(std::string key, Value v) {
    fields_.emplace_back(std::move(key), std::move(v));
    return *this;
  }

  std::string event_;
  std::vector<std::pair<std::string, Value>> fields_;
};

void add_fit_fields(Report& r, const FitReport& fit) {
  r.add("device", fit.model.device().str())
      .add("slope", fit.model.slope())
      .add("intercept_mw", fit.model.intercept_mw())
      .add("error_pct", fit.model.stated_error_pct())
      .add("provenance", std::string(to_string(fit.model.provenance())))
      .add("mae_pct", fit.mae_pct)
      .add("max_abs_err_pct", fit.max_abs_err_pct)
      .add("r_squared", fit.r_squared)
      .add("n_samples", static_cast<std::uint64_t>(fit.n_samples))
      .add("excluded_low_power", static_cast<std::uint64_t>(fit.excluded_low_power));
}

void require_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw UsageError(std::string(what) + " '" + path + "' does not exist");
  }
}

void require_writable(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty() && !fs::is_directory(parent, ec)) {
    throw UsageError("output directory '" + parent.string() + "' does not exist");
  }
}

// Internal logs are either a single power column or per-rail columns.
PowerTrace load_internal(const std::string& path, const DeviceId& device) {
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  const auto cols = text::split(text::trim(header), ',');
  const bool single = cols.size() == 2 && text::trim(cols[1]) == "power_mw";
  return load_power_trace(path, single ? TraceFormat::internal_csv : TraceFormat::rails_csv,
                          kDefaultCoilTurns, device);
}

struct ModelChoice {
  std::string device;
  std::string model_file;
};

CalibrationModel resolve_model(const ModelChoice& choice) {
  if (!choice.model_file.empty()) {
    require_file(choice.model_file, "model file");
    const auto models = load_model_file(choice.model_file);
    if (models.empty()) throw UsageError("model file '" + choice.model_file + "' has no records");
    if (choice.device.empty()) {
      if (models.size() == 1) return models.front();
      throw UsageError("model file has several records; pick one with --device");
    }
    ModelRegistry from_file;
    for (const auto& m : models) from_file.add(m);
    return from_file.get(choice.device);
  }
  if (choice.device.empty()) throw UsageError("either --device or --model is required");
  return ModelRegistry::with_builtins().get(choice.device);
}

struct PipelineOptions {
  std::string internal_csv;
  std::string external_csv;
  std::int64_t window_us = kDefaultMafWindowUs;
  std::int64_t max_gap_us = kDefaultMaxGapUs;
  double floor_mw = kDefaultLowPowerFloorMw;
  int coil_turns = kDefaultCoilTurns;
};

void add_pipeline_flags(CLI::App* cmd, PipelineOptions& opt) {
  cmd->add_option("--internal", opt.internal_csv, "Internal sensor CSV")->required();
  cmd->add_option("--external", opt.external_csv, "External reference CSV")->required();
  cmd->add_option("--window-us", opt.window_us, "Moving-average window (us)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-gap-us", opt.max_gap_us, "Maximum interpolation gap (us)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--floor-mw", opt.floor_mw, "Low-power floor for percentage metrics (mW)")
      ->capture_default_str();
  cmd->add_option("--coil-turns", opt.coil_turns, "Turns of the clamp sense coil")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

// parse -> moving average on both streams -> align.
PairedDataset prepare_pairs(const PipelineOptions& opt, const DeviceId& device) {
  require_file(opt.internal_csv, "internal trace");
  require_file(opt.external_csv, "external trace");
  const auto internal = load_internal(opt.internal_csv, device);
  const auto external =
      load_power_trace(opt.external_csv, TraceFormat::external_csv, opt.coil_turns, device);
  if (internal.empty() || external.empty()) {
    throw Error(Errc::empty_overlap, "an input trace has no samples");
  }
  const auto internal_smooth = moving_average(internal, opt.window_us);
  const auto external_smooth = moving_average(external, opt.window_us);
  if (internal_smooth.empty() || external_smooth.empty()) {
    throw Error(Errc::empty_overlap, "a trace is shorter than the moving-average window");
  }
  return align(internal_smooth, external_smooth, opt.max_gap_us);
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted.store(true); }

class Workload {
 public:
  explicit Workload(const std::string& command) {
    std::string shell = "/bin/sh";
    std::string flag = "-c";
    std::string cmd = command;
    char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
    const int rc = ::posix_spawn(&pid_, "/bin/sh", nullptr, nullptr, argv, environ);
    if (rc != 0) throw UsageError("failed to spawn workload '" + command + "'");
  }

  /// Blocks until the child exits; returns its exit status (128+signal when
  /// killed).
  int wait() {
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0) {
      if (errno != EINTR) return -1;
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return -1;
  }

  void terminate() { ::kill(pid_, SIGTERM); }

 private:
  pid_t pid_ = -1;
};

int cmd_record(const std::string& profile_name, std::optional<double> duration_s,
               const std::string& exec, const std::string& out_path,
               std::optional<double> max_rate, std::size_t buffer, bool json, std::ostream& out,
               std::ostream& err) {
  const auto profile = resolve_profile(profile_name);
  require_writable(out_path);
  std::ofstream csv(out_path);
  if (!csv) throw UsageError("cannot write '" + out_path + "'");
  if (duration_s && !(*duration_s > 0.0)) throw UsageError("--duration must be positive");

  auto backend = make_backend(profile);
  SampleChannel channel(buffer);
  SamplerControl control;
  if (duration_s) {
    control.duration = std::chrono::microseconds(static_cast<std::int64_t>(*duration_s * 1e6));
  }
  control.max_rate_hz = max_rate;

  std::stop_source stop;
  control.stop = stop.get_token();
  SamplerStats stats;
  std::exception_ptr sampler_error;
  std::thread sampler([&] {
    try {
      stats = run_sampler(profile, *backend, channel, control);
    } catch (...) {
      sampler_error = std::current_exception();
    }
  });

  std::optional<Workload> workload;
  std::optional<int> workload_rc;
  std::thread waiter;
  if (!exec.empty()) {
    try {
      workload.emplace(exec);
    } catch (...) {
      stop.request_stop();
      sampler.join();
      throw;
    }
    waiter = std::thread([&] {
      workload_rc = workload->wait();
      stop.request_stop();
    });
  }

  g_interrupted.store(false);
  auto previous = std::signal(SIGINT, on_interrupt);
  std::vector<PowerSample> samples;
  while (channel.drain(samples, std::chrono::milliseconds(50))) {
    if (g_interrupted.load()) stop.request_stop();
  }
  sampler.join();
  if (waiter.joinable()) {
    if (sampler_error) {
      err << "warning: sampler failed; terminating the workload\n";
      workload->terminate();
    }
    waiter.join();
  }
  std::signal(SIGINT, previous);
  if (sampler_error) std::rethrow_exception(sampler_error);

  write_trace_csv(csv, PowerTrace(profile.device, Source::internal, Unit::mW, std::move(samples)));
  if (!csv) throw Error(Errc::io, "write failed for '" + out_path + "'");

  Report r("record");
  r.add("device", profile.device.str())
      .add("samples_taken", stats.samples_taken)
      .add("achieved_rate_hz", stats.achieved_rate_hz)
      .add("read_errors", stats.read_errors)
      .add("dropped", stats.dropped)
      .add("start_us", stats.start_us)
      .add("end_us", stats.end_us);
  if (workload_rc) r.add("workload_exit_code", static_cast<std::int64_t>(*workload_rc));
  r.print(out, json);
  return kOk;
}

int cmd_calibrate(const PipelineOptions& opt, const std::string& device_name,
                  const std::string& out_model, bool json, std::ostream& out, std::ostream& err) {
  const DeviceId device(device_name);
  if (!out_model.empty()) require_writable(out_model);
  const auto pairs = prepare_pairs(opt, device);
  const auto report = fit(pairs, opt.floor_mw);

  const auto builtins = ModelRegistry::with_builtins();
  if (builtins.contains(device.str())) {
    const auto& published = builtins.get(device.str());
    if (published.slope() > 1.0 && report.model.slope() < 1.0) {
      err << "warning: fitted slope " << text::format_number(report.model.slope())
          << " is below 1 while the published " << device.str() << " slope is "
          << text::format_number(published.slope())
          << "; were --internal and --external swapped?\n";
    }
  }

  if (!out_model.empty()) {
    std::ofstream f(out_model);
    if (!f) throw UsageError("cannot write '" + out_model + "'");
    f << format_fit_report(report);
  }
  Report r("fit");
  add_fit_fields(r, report);
  r.print(out, json);
  return kOk;
}

int cmd_apply(const std::string& input, const ModelChoice& choice, const std::string& out_path,
              bool skip_invalid, bool json, std::ostream& out, std::ostream& err) {
  const auto model = resolve_model(choice);
  require_file(input, "input trace");
  if (!out_path.empty()) require_writable(out_path);
  const auto raw = load_internal(input, model.device());
  const auto calibrated = apply_trace(
      model, raw, skip_invalid ? InvalidReadingPolicy::skip : InvalidReadingPolicy::abort);
  for (const auto& w : calibrated.warnings()) err << "warning: " << w << '\n';

  if (!out_path.empty()) save_trace_csv(out_path, calibrated);

  double raw_sum = 0.0;
  for (const auto& s : raw.samples()) raw_sum += s.value;
  double cal_sum = 0.0;
  for (const auto& s : calibrated.samples()) cal_sum += s.value;
  const double mean_raw = raw.empty() ? 0.0 : raw_sum / static_cast<double>(raw.size());
  const double mean_cal =
      calibrated.empty() ? 0.0 : cal_sum / static_cast<double>(calibrated.size());

  Report r("apply");
  r.add("device", model.device().str())
      .add("slope", model.slope())
      .add("intercept_mw", model.intercept_mw())
      .add("n_samples", static_cast<std::uint64_t>(calibrated.size()))
      .add("mean_raw_mw", mean_raw)
      .add("mean_calibrated_mw", mean_cal)
      .add("implied_gap_pct", mean_cal != 0.0 ? (mean_cal - mean_raw) / mean_cal * 100.0 : 0.0);
  r.print(out, json);
  return kOk;
}

int cmd_validate(const PipelineOptions& opt, const ModelChoice& choice, bool json,
                 std::ostream& out) {
  const auto model = resolve_model(choice);
  const auto pairs = prepare_pairs(opt, model.device());
  const auto report = evaluate(model, pairs, opt.floor_mw);
  const bool pass = report.mae_pct <= model.stated_error_pct();

  Report r("validate");
  add_fit_fields(r, report);
  r.add("gate", std::string(pass ? "pass" : "fail"));
  r.print(out, json);
  return pass ? kOk : kGateFailed;
}

int cmd_energy(const std::string& input, const ModelChoice& choice, bool json, std::ostream& out,
               std::ostream& err) {
  const bool calibrate = !choice.device.empty() || !choice.model_file.empty();
  std::optional<CalibrationModel> model;
  if (calibrate) model = resolve_model(choice);
  require_file(input, "input trace");
  auto trace = load_internal(input, model ? model->device() : DeviceId{});
  if (model) {
    trace = apply_trace(*model, trace);
    for (const auto& w : trace.warnings()) err << "warning: " << w << '\n';
  }
  const auto energy = integrate_energy(trace);

  Report r("energy");
  r.add("calibrated", std::string(model ? "true" : "false"))
      .add("energy_mj", energy.energy_mj)
      .add("duration_us", energy.duration_us)
      .add("mean_power_mw", energy.mean_power_mw);
  r.print(out, json);
  return kOk;
}

int cmd_peak(const std::string& input, double threshold, bool json, std::ostream& out) {
  require_file(input, "input trace");
  std::ifstream in(input);
  const auto trace = parse_value_csv(in, Source::external, DeviceId{}, input);
  const auto peak = detect_peak(trace, threshold);

  Report r("peak");
  r.add("unit", std::string(to_string(trace.unit())))
      .add("peak_value", peak.peak_value)
      .add("peak_timestamp_us", peak.peak_timestamp_us)
      .add("baseline", peak.baseline)
      .add("duration_above_threshold_us", peak.duration_above_threshold_us)
      .add("threshold", peak.threshold);
  r.print(out, json);
  return kOk;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::unknown_device:
    case Errc::io:
      return kUsageError;
    default:
      return kDataError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"jetcal: calibrate built-in Jetson power sensor readings"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Emit JSON lines instead of key=value lines");
  app.fallthrough();

  // record
  auto* record = app.add_subcommand("record", "Sample the built-in sensor into an internal CSV");
  std::string profile;
  std::optional<double> duration_s;
  std::string exec;
  std::string record_out;
  std::optional<double> max_rate;
  std::size_t buffer = 1 << 16;
  record->add_option("--profile", profile, "Device profile path or name")->required();
  record->add_option("--duration", duration_s, "Recording length in seconds");
  record->add_option("--exec", exec, "Workload command; recording lasts while it runs");
  record->add_option("--out", record_out, "Output internal CSV")->required();
  record->add_option("--max-rate", max_rate, "Throttle sampling to this rate (Hz)")
      ->check(CLI::PositiveNumber);
  record->add_option("--buffer", buffer, "Sample handoff buffer capacity")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Fit a calibration model from paired traces");
  PipelineOptions cal_opt;
  std::string cal_device;
  std::string cal_out;
  add_pipeline_flags(calibrate, cal_opt);
  calibrate->add_option("--device", cal_device, "Device id for the fitted model")->required();
  calibrate->add_option("--out", cal_out, "Write the fitted model file here");

  // apply
  auto* apply_cmd = app.add_subcommand("apply", "Calibrate an internal trace");
  std::string apply_in;
  std::string apply_out;
  ModelChoice apply_model;
  bool skip_invalid = false;
  apply_cmd->add_option("input", apply_in, "Internal CSV")->required();
  apply_cmd->add_option("--device", apply_model.device, "Built-in (or model-file) device id");
  apply_cmd->add_option("--model", apply_model.model_file, "Model file");
  apply_cmd->add_option("--out", apply_out, "Calibrated CSV output");
  apply_cmd->add_flag("--skip-invalid", skip_invalid, "Drop invalid readings instead of failing");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a model against paired traces");
  PipelineOptions val_opt;
  ModelChoice val_model;
  add_pipeline_flags(validate, val_opt);
  validate->add_option("--device", val_model.device, "Built-in (or model-file) device id");
  validate->add_option("--model", val_model.model_file, "Model file");

  // energy
  auto* energy = app.add_subcommand("energy", "Integrate energy over a trace");
  std::string energy_in;
  ModelChoice energy_model;
  energy->add_option("input", energy_in, "Internal CSV")->required();
  energy->add_option("--device", energy_model.device, "Calibrate with this device model first");
  energy->add_option("--model", energy_model.model_file, "Calibrate with this model file first");

  // peak
  auto* peak = app.add_subcommand("peak", "Detect the startup peak in a trace");
  std::string peak_in;
  double threshold = 0.0;
  peak->add_option("input", peak_in, "Single-value CSV (power_mw, current_ma or voltage_v)")
      ->required();
  peak->add_option("--threshold", threshold, "Excursion threshold, in the trace unit")->required();

  std::vector<const char*> argv{"jetcal"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*record) {
      return cmd_record(profile, duration_s, exec, record_out, max_rate, buffer, json, out, err);
    }
    if (*calibrate) return cmd_calibrate(cal_opt, cal_device, cal_out, json, out, err);
    if (*apply_cmd) {
      return cmd_apply(apply_in, apply_model, apply_out, skip_invalid, json, out, err);
    }
    if (*validate) return cmd_validate(val_opt, val_model, json, out);
    if (*energy) return cmd_energy(energy_in, energy_model, json, out, err);
    if (*peak) return cmd_peak(peak_in, threshold, json, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace jetcal::cli
