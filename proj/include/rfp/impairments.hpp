// Copyright 2026 The rfprint Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Transmitter circuit nonlinearities: I/Q imbalance and a saturated cubic
// power amplifier, plus the per-device parameter grids.

#ifndef RFP_IMPAIRMENTS_HPP_
#define RFP_IMPAIRMENTS_HPP_

#include <vector>

#include "rfp/signal.hpp"

namespace rfp::impairments {

inline constexpr double kMaxEpsilon = 0.2;
inline constexpr double kMaxPhi = kPi / 30.0;
inline constexpr double kMinP1dB = 8.45;
inline constexpr double kMaxP1dB = 20.0;

struct DeviceProfile {
  int device_id = 0;
  double epsilon = 0.0;  // gain mismatch
  double phi = 0.0;      // phase mismatch, radians
  double p1db = kMaxP1dB;
};

void validate(const DeviceProfile& profile);

// Uniform inclusive grids over each parameter range, independently shuffled
// with a stream derived from `seed`.
std::vector<DeviceProfile> assign_profiles(int n_devices, std::uint64_t seed);

// Complex-baseband equivalent of the RF-domain quadrature mismatch.
ComplexSignal apply_iq_imbalance(const ComplexSignal& sig, double epsilon, double phi);
cdouble iq_imbalance_sample(cdouble x, double epsilon, double phi);

ComplexSignal apply_pa(const ComplexSignal& sig, double p1db);
cdouble pa_sample(cdouble x, double p1db);

// I/Q imbalance followed by PA compression.
ComplexSignal apply_device(const ComplexSignal& sig, const DeviceProfile& profile);

// 10*log10(sum|d - r|^2 / sum|r|^2). Returns -infinity for identical inputs.
double compute_evm_db(const ComplexSignal& distorted, const ComplexSignal& reference);

}  // namespace rfp::impairments

#endif  // RFP_IMPAIRMENTS_HPP_
