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

// Nuisance transformations: carrier frequency offset, EPA multipath fading,
// AWGN, and per-device "day" realizations of CFO and channel.

#ifndef RFP_CONFOUNDERS_HPP_
#define RFP_CONFOUNDERS_HPP_

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "rfp/dataset.hpp"
#include "rfp/signal.hpp"

namespace rfp::confounders {

struct CfoSpec {
  double ppm = 0.0;
  double carrier_freq_hz = 5.8e9;
  double sample_rate_hz = 200e6;

  // Offset in cycles per sample.
  double theta() const;
};

double ppm_to_theta(double ppm, double carrier_freq_hz, double sample_rate_hz);
double theta_to_ppm(double theta, double carrier_freq_hz, double sample_rate_hz);

struct ChannelRealization {
  std::vector<cdouble> tap_gains;
  std::vector<int> tap_delays_samples;
};

void validate(const ChannelRealization& ch);

// EPA power-delay profile.
inline constexpr std::array<double, 7> kEpaDelaysNs = {0, 30, 70, 90, 110, 190, 410};
inline constexpr std::array<double, 7> kEpaPowersDb = {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8};

// output[n] = input[n] * exp(j 2 pi n theta)
ComplexSignal apply_cfo(const ComplexSignal& sig, double theta);
void apply_cfo_inplace(std::span<cdouble> x, double theta);

// Rayleigh tap amplitudes with E[A_k^2] = P_k, uniform phases, delays
// rounded to the sample grid. Throws if two taps round to the same delay.
ChannelRealization sample_epa_channel(Rng& rng, double sample_rate_hz);

// Causal tapped-delay-line convolution truncated to the input length.
ComplexSignal apply_channel(const ComplexSignal& sig, const ChannelRealization& ch);
void apply_channel_inplace(std::vector<cdouble>& x, const ChannelRealization& ch);

// Complex Gaussian noise at the given SNR relative to the measured signal
// power. snr_db = +inf leaves the signal untouched.
ComplexSignal add_awgn(const ComplexSignal& sig, double snr_db, Rng& rng);
void add_awgn_inplace(std::span<cdouble> x, double snr_db, Rng& rng);

struct DayRealization {
  int day_index = 0;
  std::uint64_t seed = 0;
  std::map<int, double> per_device_cfo_ppm;
  std::map<int, ChannelRealization> per_device_channel;
};

struct DayConfig {
  int day_index = 0;
  std::uint64_t seed = 0;  // stream family for this experiment run
  std::pair<double, double> cfo_range_ppm{-40.0, 40.0};
  bool use_cfo = true;
  bool use_channel = true;
  double carrier_freq_hz = 5.8e9;
  double sample_rate_hz = 200e6;
};

// Draws one CFO and/or one EPA channel per device from streams keyed by
// (seed, day_index, device). Only the devices listed are drawn.
DayRealization draw_day(const DayConfig& cfg, std::span<const int> device_ids);

// Applies a device's realization to one packet: channel first, then CFO.
void apply_day_to_packet(std::vector<cdouble>& x, const DayRealization& day, int device_id,
                         const DayConfig& cfg);

struct DayResult {
  PacketSet packets;
  DayRealization realization;
};

// Applies a freshly drawn day realization to every packet, the same
// realization for all packets of a device. Throws std::invalid_argument for a
// label outside the profile set.
DayResult emulate_day(const PacketSet& clean, std::span<const int> device_ids,
                      const DayConfig& cfg);

}  // namespace rfp::confounders

#endif  // RFP_CONFOUNDERS_HPP_
