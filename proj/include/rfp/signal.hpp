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

#ifndef RFP_SIGNAL_HPP_
#define RFP_SIGNAL_HPP_

#include <span>
#include <vector>

#include "rfp/common.hpp"

namespace rfp {

// Complex baseband samples at a fixed sample rate.
struct ComplexSignal {
  std::vector<cdouble> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const { return samples.size(); }
};

// Throws std::invalid_argument unless the signal is non-empty, finite and has
// a positive sample rate.
void validate(const ComplexSignal& sig);

double mean_power(std::span<const cdouble> x);
double energy(std::span<const cdouble> x);

ComplexSignal to_signal(std::span<const cfloat> x, double sample_rate_hz);
void to_float(std::span<const cdouble> x, std::span<cfloat> out);

// In-place DFT. Forward is unnormalized; inverse scales by 1/N.
void fft_inplace(std::span<cdouble> data, bool inverse);

}  // namespace rfp

#endif  // RFP_SIGNAL_HPP_
