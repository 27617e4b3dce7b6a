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

#include <stdexcept>
#include <string>
#include <string_view>

namespace jetcal {

enum class Errc {
  invalid_argument,
  unknown_device,
  invalid_reading,
  insufficient_data,
  degenerate_data,
  suspicious_fit,
  empty_overlap,
  unit_mismatch,
  baseline_undefined,
  no_evaluable_data,
  parse,
  schema,
  sensor_read,
  sampler_failed,
  io,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by the fitter when the least-squares slope is not positive. The
/// coefficients are still reported so the caller can inspect them.
class SuspiciousFitError : public Error {
 public:
  SuspiciousFitError(double slope, double intercept_mw, const std::string& message)
      : Error(Errc::suspicious_fit, message), slope_(slope), intercept_mw_(intercept_mw) {}

  double slope() const noexcept { return slope_; }
  double intercept_mw() const noexcept { return intercept_mw_; }

 private:
  double slope_;
  double intercept_mw_;
};

}  // namespace jetcal
