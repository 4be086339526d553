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

// IEEE 802.11a legacy preamble synthesis (short + long training fields).

#ifndef RFP_PREAMBLE_HPP_
#define RFP_PREAMBLE_HPP_

#include <array>
#include <cstddef>

#include "rfp/signal.hpp"

namespace rfp::preamble {

inline constexpr int kNumSubcarriers = 64;
inline constexpr int kNumOccupied = 52;
inline constexpr int kStfPeriod = 16;
inline constexpr int kLtfPeriod = 64;
inline constexpr int kNativeLength = 320;

struct PreambleSpec {
  double native_rate_hz = 20e6;
  int oversample_factor = 10;
  double carrier_freq_hz = 5.8e9;

  double sample_rate_hz() const { return native_rate_hz * oversample_factor; }
  std::size_t length() const { return static_cast<std::size_t>(kNativeLength) * oversample_factor; }

  // Field boundaries in samples at the oversampled rate.
  std::size_t stf_end() const { return 160u * oversample_factor; }
  std::size_t ltf_cp_begin() const { return 160u * oversample_factor; }
  std::size_t ltf_symbol_begin(int index) const {
    return (192u + 64u * static_cast<std::size_t>(index)) * oversample_factor;
  }
  std::size_t ltf_symbol_length() const { return 64u * oversample_factor; }
  std::size_t fft_size() const { return 64u * oversample_factor; }
};

// Throws std::invalid_argument on a non-positive oversample factor or rate.
void validate(const PreambleSpec& spec);

// Subcarrier indices -26..-1, 1..26 in ascending order.
const std::array<int, kNumOccupied>& occupied_subcarriers();

// Frequency-domain training sequences indexed by subcarrier -26..26.
const std::array<cdouble, 53>& stf_sequence();
const std::array<cdouble, 53>& ltf_sequence();

// Maps a subcarrier index to a bin of an N-point FFT.
inline std::size_t subcarrier_bin(int k, std::size_t n) {
  return static_cast<std::size_t>((k + static_cast<long>(n)) % static_cast<long>(n));
}

// Unit-power preamble of length 320 * oversample_factor.
ComplexSignal generate_preamble(const PreambleSpec& spec);

// FFT of one (unit-power-scaled) long training symbol at each occupied
// subcarrier, in occupied_subcarriers() order.
std::array<cdouble, kNumOccupied> ltf_reference(const PreambleSpec& spec);

// Scales the signal to unit mean-square power. Throws std::invalid_argument
// ("zero-energy signal") when the input has no energy.
ComplexSignal normalize_power(const ComplexSignal& sig);
void normalize_power_inplace(std::span<cdouble> x);
void normalize_power_inplace(std::span<cfloat> x);

}  // namespace rfp::preamble

#endif  // RFP_PREAMBLE_HPP_
