/*
 Copyright 2026 The ringrotor Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

namespace ringrotor::servo {

/// First-order model of the retraction servo driving the side length.
/// time_constant and rate_limit are engineering assumptions (no measured
/// values exist for them); both are configurable.
struct ServoParams {
  double time_constant = 0.5;  ///< [s]
  double rate_limit = 0.3;     ///< [m/s]
  double L_min = 0.284;        ///< [m]
  double L_max = 0.414;        ///< [m]
};

/// Retraction-rate command: (L_ref - L) / time_constant, saturated to the
/// rate limit.  A reference outside [L_min, L_max] is clamped to the range
/// before use; if ref_clamped is non-null it is set accordingly.
double servo_command(double L_ref, double L, const ServoParams& params,
                     bool* ref_clamped = nullptr);

/// Integrate the side length one step and clamp to the admissible range:
/// L' = clamp(L + rate * dt, L_min, L_max).
double servo_step(double L, double rate, double dt,
                  const ServoParams& params);

}  // namespace ringrotor::servo
