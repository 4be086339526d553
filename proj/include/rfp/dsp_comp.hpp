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

// Preamble-aided compensation: CFO estimation and correction, LTF channel
// estimation, frequency-domain equalization and linear-model residuals.

#ifndef RFP_DSP_COMP_HPP_
#define RFP_DSP_COMP_HPP_

#include <array>
#include <optional>

#include "rfp/preamble.hpp"
#include "rfp/signal.hpp"

namespace rfp::dsp {

// Half-open sample range [begin, end) of correlation lags n: the products
// conj(r[n]) * r[n + L] are summed over it.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Estimates theta (cycles/sample) for r[n] = s[n] exp(j 2 pi n theta) where
// s has period `period`. The result is confined to |theta| <= 1/(2 period).
double estimate_cfo_periodic(std::span<const cdouble> sig, std::size_t period, IndexRange window);

// Coarse estimate on the short field, then a fine estimate on the long field
// after removing the coarse offset. Returns coarse + fine.
double estimate_cfo_two_step(std::span<const cdouble> sig, const preamble::PreambleSpec& spec);

ComplexSignal compensate_cfo(const ComplexSignal& sig, double theta_hat);
void compensate_cfo_inplace(std::span<cdouble> x, double theta_hat);

struct ChannelEstimate {
  // One value per occupied subcarrier, occupied_subcarriers() order.
  std::array<cdouble, preamble::kNumOccupied> freq_response{};
  std::size_t fft_size = 64;
  int oversample_factor = 1;
};

// Least-squares estimate averaged over the two long training symbols. The
// signal must already be CFO-compensated.
ChannelEstimate estimate_channel_ltf(std::span<const cdouble> sig, const preamble::PreambleSpec& spec);

// Estimate holding the exact response of a tapped delay line at each
// occupied subcarrier.
ChannelEstimate channel_response(std::span<const cdouble> tap_gains, std::span<const int> tap_delays,
                                 const preamble::PreambleSpec& spec);

// Per-bin response for an N-point FFT of the whole signal: linear
// interpolation between subcarriers inside the occupied band, 1 outside.
std::vector<cdouble> expand_response(const ChannelEstimate& est, std::size_t n, bool floor_magnitude);

inline constexpr double kEqualizerFloor = 1e-3;

// Divides each occupied bin by the (floored) response and transforms back.
ComplexSignal equalize(const ComplexSignal& sig, const ChannelEstimate& est);
void equalize_inplace(std::vector<cdouble>& x, const ChannelEstimate& est);

// Multiplies each occupied bin by the response (the equalizer's inverse).
void apply_channel_freq_inplace(std::vector<cdouble>& x, const ChannelEstimate& est);

// x - x_hat, where x_hat is the ideal preamble passed through the estimated
// channel (if any) and then rotated by theta_hat. Normalized to unit power
// when `normalize` is set and the residual has energy.
ComplexSignal compute_residual(const ComplexSignal& sig, const preamble::PreambleSpec& spec, double theta_hat,
                               const std::optional<ChannelEstimate>& est, bool normalize = true);

}  // namespace rfp::dsp

#endif  // RFP_DSP_COMP_HPP_
