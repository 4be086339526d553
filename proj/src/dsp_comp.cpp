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

#include "rfp/dsp_comp.hpp"

#include <algorithm>
#include <cmath>

#include "rfp/confounders.hpp"

namespace rfp::dsp {

double estimate_cfo_periodic(std::span<const cdouble> sig, std::size_t period, IndexRange window) {
  if (period < 1) throw std::invalid_argument("period must be >= 1");
  if (window.end < window.begin + 2) throw std::invalid_argument("estimation window too small");
  if (window.end + period > sig.size()) throw std::invalid_argument("estimation window out of bounds");
  cdouble acc(0.0, 0.0);
  for (std::size_t n = window.begin; n < window.end; ++n) acc += std::conj(sig[n]) * sig[n + period];
  return std::arg(acc) / (2.0 * kPi * static_cast<double>(period));
}

double estimate_cfo_two_step(std::span<const cdouble> sig, const preamble::PreambleSpec& spec) {
  preamble::validate(spec);
  if (sig.size() != spec.length()) throw std::invalid_argument("signal is not a full preamble");
  const auto os = static_cast<std::size_t>(spec.oversample_factor);

  // The first short symbol and the first half of the long guard interval
  // absorb multipath transients from the preceding field.
  const std::size_t short_period = preamble::kStfPeriod * os;
  const double coarse =
      estimate_cfo_periodic(sig, short_period, {short_period, spec.stf_end() - short_period});

  std::vector<cdouble> derotated(sig.begin(), sig.end());
  compensate_cfo_inplace(derotated, coarse);

  const std::size_t long_period = preamble::kLtfPeriod * os;
  const std::size_t fine_begin = spec.ltf_cp_begin() + 16 * os;
  const double fine =
      estimate_cfo_periodic(derotated, long_period, {fine_begin, spec.ltf_symbol_begin(1)});
  return coarse + fine;
}

void compensate_cfo_inplace(std::span<cdouble> x, double theta_hat) {
  confounders::apply_cfo_inplace(x, -theta_hat);
}

ComplexSignal compensate_cfo(const ComplexSignal& sig, double theta_hat) {
  ComplexSignal out = sig;
  compensate_cfo_inplace(out.samples, theta_hat);
  return out;
}

ChannelEstimate estimate_channel_ltf(std::span<const cdouble> sig, const preamble::PreambleSpec& spec) {
  preamble::validate(spec);
  if (sig.size() != spec.length()) throw std::invalid_argument("signal is not a full preamble");
  const std::size_t n = spec.fft_size();
  const auto ref = preamble::ltf_reference(spec);
  const auto& ks = preamble::occupied_subcarriers();

  ChannelEstimate est;
  est.fft_size = n;
  est.oversample_factor = spec.oversample_factor;
  for (int s = 0; s < 2; ++s) {
    const std::size_t begin = spec.ltf_symbol_begin(s);
    std::vector<cdouble> sym(sig.begin() + static_cast<long>(begin),
                             sig.begin() + static_cast<long>(begin + n));
    fft_inplace(sym, /*inverse=*/false);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      est.freq_response[i] += 0.5 * sym[preamble::subcarrier_bin(ks[i], n)] / ref[i];
    }
  }
  return est;
}

ChannelEstimate channel_response(std::span<const cdouble> tap_gains, std::span<const int> tap_delays,
                                 const preamble::PreambleSpec& spec) {
  if (tap_gains.size() != tap_delays.size()) throw std::invalid_argument("taps/delays mismatch");
  ChannelEstimate est;
  est.fft_size = spec.fft_size();
  est.oversample_factor = spec.oversample_factor;
  const auto& ks = preamble::occupied_subcarriers();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    cdouble h(0.0, 0.0);
    for (std::size_t t = 0; t < tap_gains.size(); ++t) {
      h += tap_gains[t] * std::polar(1.0, -2.0 * kPi * ks[i] * tap_delays[t] / static_cast<double>(est.fft_size));
    }
    est.freq_response[i] = h;
  }
  return est;
}

std::vector<cdouble> expand_response(const ChannelEstimate& est, std::size_t n, bool floor_magnitude) {
  const auto& h = est.freq_response;
  double max_mag = 0.0;
  for (const cdouble& v : h) max_mag = std::max(max_mag, std::abs(v));
  const double floor = kEqualizerFloor * max_mag;

  // Index into h for subcarrier k (k != 0).
  auto at = [&](int k) { return h[static_cast<std::size_t>(k < 0 ? k + 26 : k + 25)]; };

  std::vector<cdouble> out(n, cdouble(1.0, 0.0));
  const double ratio = static_cast<double>(est.fft_size) / static_cast<double>(n);
  const long half = static_cast<long>(n) / 2;
  for (long m = -half; m < static_cast<long>(n) - half; ++m) {
    const double q = static_cast<double>(m) * ratio;  // position in subcarrier units
    if (std::abs(q) > 26.0 + 1e-9) continue;
    cdouble v;
    if (q > -1.0 && q < 1.0) {
      const double w = (q + 1.0) / 2.0;
      v = (1.0 - w) * at(-1) + w * at(1);
    } else {
      const int lo = static_cast<int>(std::floor(q + 1e-9));
      const double w = q - lo;
      v = w < 1e-9 ? at(lo) : (1.0 - w) * at(lo) + w * at(lo + 1);
    }
    if (floor_magnitude) {
      const double mag = std::abs(v);
      if (mag < floor) v = mag > 0.0 ? v * (floor / mag) : cdouble(floor, 0.0);
    }
    out[static_cast<std::size_t>((m + static_cast<long>(n)) % static_cast<long>(n))] = v;
  }
  return out;
}

void equalize_inplace(std::vector<cdouble>& x, const ChannelEstimate& est) {
  const std::vector<cdouble> resp = expand_response(est, x.size(), /*floor_magnitude=*/true);
  fft_inplace(x, /*inverse=*/false);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] /= resp[i];
  fft_inplace(x, /*inverse=*/true);
}

ComplexSignal equalize(const ComplexSignal& sig, const ChannelEstimate& est) {
  ComplexSignal out = sig;
  equalize_inplace(out.samples, est);
  return out;
}

void apply_channel_freq_inplace(std::vector<cdouble>& x, const ChannelEstimate& est) {
  const std::vector<cdouble> resp = expand_response(est, x.size(), /*floor_magnitude=*/false);
  fft_inplace(x, /*inverse=*/false);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= resp[i];
  fft_inplace(x, /*inverse=*/true);
}

ComplexSignal compute_residual(const ComplexSignal& sig, const preamble::PreambleSpec& spec, double theta_hat,
                               const std::optional<ChannelEstimate>& est, bool normalize) {
  ComplexSignal recon = preamble::generate_preamble(spec);
  if (recon.size() != sig.size()) throw std::invalid_argument("signal is not a full preamble");
  if (est) apply_channel_freq_inplace(recon.samples, *est);
  confounders::apply_cfo_inplace(recon.samples, theta_hat);
  ComplexSignal out = sig;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] -= recon.samples[i];
  if (normalize && energy(out.samples) > 0.0) preamble::normalize_power_inplace(out.samples);
  return out;
}

}  // namespace rfp::dsp
