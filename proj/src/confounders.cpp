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

#include "rfp/confounders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rfp::confounders {

double ppm_to_theta(double ppm, double carrier_freq_hz, double sample_rate_hz) {
  return ppm * 1e-6 * carrier_freq_hz / sample_rate_hz;
}

double theta_to_ppm(double theta, double carrier_freq_hz, double sample_rate_hz) {
  return theta * sample_rate_hz / (carrier_freq_hz * 1e-6);
}

double CfoSpec::theta() const {
  const double t = ppm_to_theta(ppm, carrier_freq_hz, sample_rate_hz);
  if (!std::isfinite(t)) throw std::invalid_argument("non-finite normalized offset");
  return t;
}

void validate(const ChannelRealization& ch) {
  if (ch.tap_gains.size() != ch.tap_delays_samples.size() || ch.tap_gains.empty()) {
    throw std::invalid_argument("channel taps and delays must be non-empty and equal length");
  }
  if (ch.tap_delays_samples.front() < 0) throw std::invalid_argument("negative tap delay");
  for (std::size_t k = 1; k < ch.tap_delays_samples.size(); ++k) {
    if (ch.tap_delays_samples[k] <= ch.tap_delays_samples[k - 1]) {
      throw std::invalid_argument("tap delays must be strictly increasing");
    }
  }
}

void apply_cfo_inplace(std::span<cdouble> x, double theta) {
  for (std::size_t n = 0; n < x.size(); ++n) {
    x[n] *= std::polar(1.0, 2.0 * kPi * theta * static_cast<double>(n));
  }
}

ComplexSignal apply_cfo(const ComplexSignal& sig, double theta) {
  ComplexSignal out = sig;
  apply_cfo_inplace(out.samples, theta);
  return out;
}

ChannelRealization sample_epa_channel(Rng& rng, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
  ChannelRealization ch;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < kEpaDelaysNs.size(); ++k) {
    const double power = std::pow(10.0, kEpaPowersDb[k] / 10.0);
    // Rayleigh with scale sigma has E[A^2] = 2 sigma^2.
    const double sigma = std::sqrt(power / 2.0);
    const double u = std::max(unit(rng), std::numeric_limits<double>::min());
    const double amplitude = sigma * std::sqrt(-2.0 * std::log(u));
    const double phase = 2.0 * kPi * unit(rng);
    ch.tap_gains.push_back(std::polar(amplitude, phase));
    ch.tap_delays_samples.push_back(static_cast<int>(std::lround(kEpaDelaysNs[k] * 1e-9 * sample_rate_hz)));
  }
  for (std::size_t k = 1; k < ch.tap_delays_samples.size(); ++k) {
    if (ch.tap_delays_samples[k] == ch.tap_delays_samples[k - 1]) {
      throw std::invalid_argument("EPA taps collide at this sample rate");
    }
  }
  return ch;
}

void apply_channel_inplace(std::vector<cdouble>& x, const ChannelRealization& ch) {
  validate(ch);
  if (static_cast<std::size_t>(ch.tap_delays_samples.back()) >= x.size()) {
    throw std::invalid_argument("channel delay spread exceeds signal length");
  }
  std::vector<cdouble> y(x.size(), cdouble(0.0, 0.0));
  for (std::size_t k = 0; k < ch.tap_gains.size(); ++k) {
    const std::size_t d = static_cast<std::size_t>(ch.tap_delays_samples[k]);
    const cdouble g = ch.tap_gains[k];
    for (std::size_t n = d; n < x.size(); ++n) y[n] += g * x[n - d];
  }
  x.swap(y);
}

ComplexSignal apply_channel(const ComplexSignal& sig, const ChannelRealization& ch) {
  ComplexSignal out = sig;
  apply_channel_inplace(out.samples, ch);
  return out;
}

void add_awgn_inplace(std::span<cdouble> x, double snr_db, Rng& rng) {
  if (std::isinf(snr_db) && snr_db > 0) return;
  const double p = mean_power(x);
  if (!(p > 0.0)) throw std::invalid_argument("zero-power signal");
  const double noise_var = p / std::pow(10.0, snr_db / 10.0);
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var / 2.0));
  for (cdouble& v : x) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += cdouble(re, im);
  }
}

ComplexSignal add_awgn(const ComplexSignal& sig, double snr_db, Rng& rng) {
  ComplexSignal out = sig;
  add_awgn_inplace(out.samples, snr_db, rng);
  return out;
}

DayRealization draw_day(const DayConfig& cfg, std::span<const int> device_ids) {
  if (!(cfg.cfo_range_ppm.first <= cfg.cfo_range_ppm.second)) {
    throw std::invalid_argument("CFO range must satisfy lo <= hi");
  }
  DayRealization day;
  day.day_index = cfg.day_index;
  day.seed = cfg.seed;
  const auto day_key = static_cast<std::uint64_t>(cfg.day_index);
  for (int dev : device_ids) {
    const auto dkey = static_cast<std::uint64_t>(dev);
    if (cfg.use_cfo) {
      Rng rng = make_rng({cfg.seed, Stream::kDayCfo, dkey, day_key, 0});
      std::uniform_real_distribution<double> u(cfg.cfo_range_ppm.first, cfg.cfo_range_ppm.second);
      day.per_device_cfo_ppm[dev] = u(rng);
    }
    if (cfg.use_channel) {
      Rng rng = make_rng({cfg.seed, Stream::kDayChannel, dkey, day_key, 0});
      day.per_device_channel[dev] = sample_epa_channel(rng, cfg.sample_rate_hz);
    }
  }
  return day;
}

void apply_day_to_packet(std::vector<cdouble>& x, const DayRealization& day, int device_id,
                         const DayConfig& cfg) {
  if (cfg.use_channel) {
    auto it = day.per_device_channel.find(device_id);
    if (it == day.per_device_channel.end()) throw std::invalid_argument("unknown device_id");
    apply_channel_inplace(x, it->second);
  }
  if (cfg.use_cfo) {
    auto it = day.per_device_cfo_ppm.find(device_id);
    if (it == day.per_device_cfo_ppm.end()) throw std::invalid_argument("unknown device_id");
    apply_cfo_inplace(x, ppm_to_theta(it->second, cfg.carrier_freq_hz, cfg.sample_rate_hz));
  }
}

DayResult emulate_day(const PacketSet& clean, std::span<const int> device_ids,
                      const DayConfig& cfg) {
  for (int label : clean.labels) {
    if (std::find(device_ids.begin(), device_ids.end(), label) == device_ids.end()) {
      throw std::invalid_argument("unknown device_id " + std::to_string(label));
    }
  }
  DayResult out;
  out.realization = draw_day(cfg, device_ids);
  out.packets.packet_length = clean.packet_length;
  out.packets.reserve(clean.size());
  std::vector<cdouble> buf(clean.packet_length);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    auto p = clean.packet(i);
    std::copy(p.begin(), p.end(), buf.begin());
    apply_day_to_packet(buf, out.realization, clean.labels[i], cfg);
    out.packets.push_back(std::span<const cdouble>(buf), clean.labels[i]);
  }
  return out;
}

}  // namespace rfp::confounders
