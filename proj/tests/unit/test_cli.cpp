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

#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "jetcal/model.hpp"
#include "jetcal/signal.hpp"
#include "support/cli_harness.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace jetcal {
namespace {

using testing::run_cli;
using testing::ScratchDir;

const ModelRegistry kRegistry = ModelRegistry::with_builtins();

PowerTrace constant(double mw, std::int64_t span_us, std::int64_t step_us) {
  std::vector<PowerSample> s;
  for (std::int64_t t = 0; t <= span_us; t += step_us) s.push_back({t, mw});
  return PowerTrace(DeviceId("nano"), Source::internal, Unit::mW, std::move(s));
}

class CalibrateCli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new ScratchDir("cli_calibrate");
    synthetic::CampaignOptions opt;
    opt.duration_us = 40'000'000;
    const auto c = synthetic::make_campaign(kRegistry.get("nano"), 1234, opt);
    internal_ = dir_->write_trace("internal.csv", c.internal);
    external_ = dir_->write_trace("external.csv", c.external);
  }
  static void TearDownTestSuite() { delete dir_; }

  static ScratchDir* dir_;
  static std::string internal_, external_;
};
ScratchDir* CalibrateCli::dir_ = nullptr;
std::string CalibrateCli::internal_, CalibrateCli::external_;

TEST_F(CalibrateCli, RecoversNanoModel) {
  const auto model_path = *dir_ / "nano.model";
  const auto r = run_cli({"calibrate", "--internal", internal_, "--external", external_,
                          "--device", "nano", "--out", model_path, "--json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["event"], "fit");
  EXPECT_NEAR(j["slope"].get<double>(), 1.11, 0.011);
  EXPECT_NEAR(j["intercept_mw"].get<double>(), 232.60, 0.05 * 232.60);
  EXPECT_EQ(j["provenance"], "fitted");
  EXPECT_TRUE(r.err.empty()) << r.err;

  const auto models = load_model_file(model_path);
  ASSERT_EQ(models.size(), 1u);
  EXPECT_EQ(models[0].slope(), j["slope"].get<double>());

  // the written model feeds validate
  const auto v = run_cli({"validate", "--model", model_path, "--internal", internal_,
                          "--external", external_});
  EXPECT_EQ(v.exit_code, 0) << v.out << v.err;
  EXPECT_EQ(v.fields().at("gate"), "pass");
}

TEST_F(CalibrateCli, SwappedInputsWarn) {
  const auto r = run_cli({"calibrate", "--internal", external_, "--external", internal_,
                          "--device", "nano", "--json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NEAR(r.json()["slope"].get<double>(), 1.0 / 1.11, 0.01);
  EXPECT_NE(r.err.find("swapped"), std::string::npos);
}

TEST_F(CalibrateCli, BuiltinModelPassesValidationGate) {
  const auto r = run_cli({"validate", "--device", "nano", "--internal", internal_, "--external",
                          external_, "--json"});
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_LE(r.json()["mae_pct"].get<double>(), 0.8);
}

TEST_F(CalibrateCli, IdentityModelFailsGate) {
  const auto model = dir_->write(
      "identity.model", "device=nano slope=1 intercept_mw=0 error_pct=3 provenance=fitted\n");
  const auto r = run_cli({"validate", "--model", model, "--internal", internal_, "--external",
                          external_, "--json"});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_GT(r.json()["mae_pct"].get<double>(), 8.0);
  EXPECT_EQ(r.json()["gate"], "fail");
}

TEST_F(CalibrateCli, FloorExcludingEverythingIsDataError) {
  const auto r = run_cli({"validate", "--device", "nano", "--internal", internal_, "--external",
                          external_, "--floor-mw", "1e9"});
  EXPECT_EQ(r.exit_code, 3);
}

TEST_F(CalibrateCli, HumanAndJsonCarrySameValues) {
  const std::vector<std::string> base{"calibrate", "--internal", internal_, "--external",
                                      external_, "--device", "nano"};
  const auto human = run_cli(base);
  auto with_json = base;
  with_json.push_back("--json");
  const auto machine = run_cli(with_json);
  ASSERT_EQ(human.exit_code, 0);
  const auto kv = human.fields();
  const auto j = machine.json();
  for (const auto& key : {"slope", "intercept_mw", "mae_pct", "max_abs_err_pct", "r_squared"}) {
    EXPECT_EQ(std::stod(kv.at(key)), j[key].get<double>()) << key;
  }
  EXPECT_EQ(std::stoll(kv.at("n_samples")), j["n_samples"].get<std::int64_t>());
  EXPECT_EQ(kv.at("device"), j["device"].get<std::string>());
}

TEST(CalibrateCliErrors, ZeroOverlapIsExitThree) {
  ScratchDir dir("cli_overlap");
  const auto a = dir.write_trace("a.csv", constant(5000.0, 1'000'000, 1000));
  std::vector<PowerSample> later;
  for (std::int64_t t = 5'000'000; t <= 6'000'000; t += 1000) later.push_back({t, 6000.0 + t % 7});
  const auto b = dir.write_trace(
      "b.csv", PowerTrace(DeviceId("nano"), Source::external, Unit::mW, std::move(later)));
  const auto r = run_cli({"calibrate", "--internal", a, "--external", b, "--device", "nano"});
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("empty-overlap"), std::string::npos) << r.err;
}

TEST(CalibrateCliErrors, ChannelExportWithCoilTurns) {
  ScratchDir dir("cli_channels");
  const auto& nano = kRegistry.get("nano");
  std::string ext = "timestamp_us,voltage_v,current_a\n";
  std::vector<PowerSample> in;
  for (std::int64_t i = 0; i <= 3000; ++i) {
    const std::int64_t t = i * 1000;
    const double truth = 6000.0 + 4000.0 * static_cast<double>(i % 1000) / 1000.0;
    // 5 V supply, 4-turn coil: clamp reads 4x the conductor current
    ext += std::to_string(t) + ",5," + std::to_string(truth / 5.0 / 1000.0 * 4.0) + "\n";
    if (i % 3 == 0) in.push_back({t, invert(nano, truth)});
  }
  const auto e = dir.write("ext.csv", ext);
  const auto n = dir.write_trace("in.csv", PowerTrace(DeviceId("nano"), Source::internal, Unit::mW, in));
  const auto r = run_cli({"calibrate", "--internal", n, "--external", e, "--device", "nano",
                          "--coil-turns", "4", "--json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NEAR(r.json()["slope"].get<double>(), 1.11, 0.01);
}

TEST(ApplyCli, NanoAndTx2Constants) {
  ScratchDir dir("cli_apply");
  const auto in = dir.write_trace("in.csv", constant(10000.0, 10000, 1000));
  const auto out = dir / "out.csv";
  const auto r = run_cli({"apply", in, "--device", "nano", "--out", out});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto cal = load_power_trace(out, TraceFormat::external_csv);
  ASSERT_EQ(cal.size(), 11u);
  for (const auto& s : cal.samples()) EXPECT_NEAR(s.value, 11332.60, 1e-9);
  EXPECT_NEAR(std::stod(r.fields().at("implied_gap_pct")), (11332.6 - 10000.0) / 11332.6 * 100.0,
              1e-9);

  const auto tx2_in = dir.write_trace("tx2.csv", constant(20000.0, 5000, 1000));
  const auto t = run_cli({"apply", tx2_in, "--device", "tx2", "--json"});
  ASSERT_EQ(t.exit_code, 0);
  EXPECT_NEAR(t.json()["mean_calibrated_mw"].get<double>(), 19998.80, 1e-9);
}

TEST(ApplyCli, UnknownDeviceListsRegistry) {
  ScratchDir dir("cli_apply_unknown");
  const auto in = dir.write_trace("in.csv", constant(10000.0, 2000, 1000));
  const auto r = run_cli({"apply", in, "--device", "rpi4"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("xavier-nx"), std::string::npos) << r.err;
  EXPECT_EQ(run_cli({"apply", in}).exit_code, 2);
}

TEST(EnergyCli, ConstantAndCalibrated) {
  ScratchDir dir("cli_energy");
  const auto in = dir.write_trace("in.csv", constant(1000.0, 10'000'000, 100'000));
  const auto r = run_cli({"energy", in, "--json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NEAR(r.json()["energy_mj"].get<double>(), 10000.0, 1e-9);
  EXPECT_EQ(r.json()["duration_us"].get<std::int64_t>(), 10'000'000);

  const auto c = run_cli({"energy", in, "--device", "nano", "--json"});
  ASSERT_EQ(c.exit_code, 0);
  const auto trace = load_power_trace(in, TraceFormat::internal_csv);
  const auto calibrated = apply_trace(kRegistry.get("nano"), trace);
  EXPECT_NEAR(c.json()["energy_mj"].get<double>(), oracle::trapezoid_mj(calibrated.samples()), 1e-6);
  EXPECT_NEAR(c.json()["energy_mj"].get<double>(), (1.11 * 1000.0 + 232.60) * 10.0, 1e-6);

  const auto one = dir.write_trace("one.csv", constant(1000.0, 0, 1));
  EXPECT_EQ(run_cli({"energy", one}).exit_code, 3);
}

TEST(PeakCli, BootTraceAndErrors) {
  ScratchDir dir("cli_peak");
  const auto boot = dir.write_trace("boot.csv", synthetic::boot_trace(6580.0));
  const auto r = run_cli({"peak", boot, "--threshold", "1000", "--json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.json()["peak_value"].get<double>(), 6580.0);
  EXPECT_EQ(r.json()["unit"], "mA");

  std::vector<PowerSample> flat;
  for (std::int64_t t = 0; t < 100; ++t) flat.push_back({t * 100, 150.0});
  const auto f = dir.write_trace("flat.csv", PowerTrace(DeviceId{}, Source::external, Unit::mA, flat));
  const auto fr = run_cli({"peak", f, "--threshold", "1000"});
  ASSERT_EQ(fr.exit_code, 0);
  EXPECT_EQ(fr.fields().at("duration_above_threshold_us"), "0");
  EXPECT_EQ(run_cli({"peak", f, "--threshold", "10"}).exit_code, 3);
}

TEST(RecordCli, ReplayProfileOneSecond) {
  ScratchDir dir("cli_record");
  const auto out = dir / "rec.csv";
  const auto r = run_cli({"record", "--profile", std::string(JETCAL_PROFILES_DIR) + "/replay-nano.profile",
                          "--duration", "1", "--out", out, "--json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = r.json();
  EXPECT_GT(j["samples_taken"].get<std::int64_t>(), 0);
  EXPECT_EQ(j["read_errors"].get<std::int64_t>(), 0);
  const auto trace = load_power_trace(out, TraceFormat::internal_csv);
  EXPECT_EQ(static_cast<std::int64_t>(trace.size()) + j["dropped"].get<std::int64_t>(),
            j["samples_taken"].get<std::int64_t>());
  EXPECT_GT(trace.size(), 0u);
}

TEST(RecordCli, ExecWorkloadBoundsRecording) {
  ScratchDir dir("cli_record_exec");
  ::setenv("JETCAL_PROFILE_PATH", JETCAL_PROFILES_DIR, 1);
  const auto r = run_cli({"record", "--profile", "replay-nano", "--exec", "sleep 2", "--out",
                          dir / "rec.csv", "--json"});
  ::unsetenv("JETCAL_PROFILE_PATH");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = r.json();
  const auto span = j["end_us"].get<std::int64_t>() - j["start_us"].get<std::int64_t>();
  EXPECT_GE(span, 1'900'000);
  EXPECT_LE(span, 3'000'000);
  EXPECT_EQ(j["workload_exit_code"].get<std::int64_t>(), 0);
}

TEST(RecordCli, BadProfileIsUsageError) {
  ScratchDir dir("cli_record_bad");
  const auto r = run_cli({"record", "--profile", "/nonexistent/p.profile", "--duration", "1",
                          "--out", dir / "x.csv"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("not found"), std::string::npos) << r.err;
}

TEST(Binary, ExitCodesFromRealProcess) {
  auto status_of = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const std::string bin = JETCAL_BINARY;
  EXPECT_EQ(status_of(bin + " --help"), 0);
  EXPECT_EQ(status_of(bin), 2);
  EXPECT_EQ(status_of(bin + " frobnicate"), 2);
  EXPECT_EQ(status_of(bin + " apply /nonexistent.csv --device nano"), 2);
}

}  // namespace
}  // namespace jetcal
