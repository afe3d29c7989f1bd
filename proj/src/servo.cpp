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

#include "ringrotor/servo.hpp"

#include <algorithm>
#include <stdexcept>

namespace ringrotor::servo {

namespace {

void check(const ServoParams& p) {
  if (!(p.time_constant > 0.0) || !(p.rate_limit > 0.0) ||
      !(p.L_max > p.L_min)) {
    throw std::invalid_argument("servo: invalid parameters");
  }
}

}  // namespace

double servo_command(double L_ref, double L, const ServoParams& params,
                     bool* ref_clamped) {
  check(params);
  const double ref = std::clamp(L_ref, params.L_min, params.L_max);
  if (ref_clamped != nullptr) *ref_clamped = ref != L_ref;
  const double rate = (ref - L) / params.time_constant;
  return std::clamp(rate, -params.rate_limit, params.rate_limit);
}

double servo_step(double L, double rate, double dt,
                  const ServoParams& params) {
  check(params);
  if (!(dt > 0.0)) {
    throw std::invalid_argument("servo: step size must be positive");
  }
  return std::clamp(L + rate * dt, params.L_min, params.L_max);
}

}  // namespace ringrotor::servo
