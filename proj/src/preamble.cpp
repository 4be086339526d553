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

#include "rfp/preamble.hpp"

#include <cmath>

namespace rfp::preamble {
namespace {

std::array<cdouble, 53> make_stf() {
  std::array<cdouble, 53> s{};
  const double a = std::sqrt(13.0 / 6.0);
  const cdouble p(a, a);
  // Nonzero tones every fourth subcarrier.
  const int idx[12] = {-24, -20, -16, -12, -8, -4, 4, 8, 12, 16, 20, 24};
  const int sgn[12] = {+1, -1, +1, -1, -1, +1, -1, -1, +1, +1, +1, +1};
  for (int i = 0; i < 12; ++i) s[static_cast<std::size_t>(idx[i] + 26)] = double(sgn[i]) * p;
  return s;
}

std::array<cdouble, 53> make_ltf() {
  const int l[53] = {1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1,
                     1, -1, 1, -1, 1, 1, 1, 1, 0, 1, -1, -1, 1, 1, -1, 1, -1, 1,
                     -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1};
  std::array<cdouble, 53> s{};
  for (int i = 0; i < 53; ++i) s[static_cast<std::size_t>(i)] = cdouble(l[i], 0.0);
  return s;
}

// One period of the field at the oversampled rate: the 64 subcarriers are
// placed on an N = 64 * os grid and the rest zero-filled (band-limited
// interpolation).
std::vector<cdouble> synthesize_symbol(const std::array<cdouble, 53>& seq, std::size_t n) {
  std::vector<cdouble> bins(n, cdouble(0.0, 0.0));
  for (int k = -26; k <= 26; ++k) bins[subcarrier_bin(k, n)] = seq[static_cast<std::size_t>(k + 26)];
  fft_inplace(bins, /*inverse=*/true);
  return bins;
}

}  // namespace

void validate(const PreambleSpec& spec) {
  if (spec.oversample_factor < 1) throw std::invalid_argument("oversample_factor must be >= 1");
  if (!(spec.native_rate_hz > 0.0)) throw std::invalid_argument("native rate must be positive");
  if (!(spec.carrier_freq_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
}

const std::array<int, kNumOccupied>& occupied_subcarriers() {
  static const std::array<int, kNumOccupied> ks = [] {
    std::array<int, kNumOccupied> out{};
    std::size_t i = 0;
    for (int k = -26; k <= 26; ++k) {
      if (k != 0) out[i++] = k;
    }
    return out;
  }();
  return ks;
}

const std::array<cdouble, 53>& stf_sequence() {
  static const std::array<cdouble, 53> s = make_stf();
  return s;
}

const std::array<cdouble, 53>& ltf_sequence() {
  static const std::array<cdouble, 53> s = make_ltf();
  return s;
}

ComplexSignal generate_preamble(const PreambleSpec& spec) {
  validate(spec);
  const std::size_t n = spec.fft_size();
  const std::vector<cdouble> stf = synthesize_symbol(stf_sequence(), n);
  const std::vector<cdouble> ltf = synthesize_symbol(ltf_sequence(), n);

  ComplexSignal out;
  out.sample_rate_hz = spec.sample_rate_hz();
  out.samples.resize(spec.length());
  const std::size_t stf_len = spec.stf_end();
  for (std::size_t i = 0; i < stf_len; ++i) out.samples[i] = stf[i % n];
  // Long field: 1.6 us guard (last half symbol), then two full symbols.
  const std::size_t cp = n / 2;
  const std::size_t ltf_len = spec.length() - stf_len;
  for (std::size_t m = 0; m < ltf_len; ++m) out.samples[stf_len + m] = ltf[(m + n - cp) % n];
  normalize_power_inplace(out.samples);
  return out;
}

std::array<cdouble, kNumOccupied> ltf_reference(const PreambleSpec& spec) {
  const ComplexSignal p = generate_preamble(spec);
  const std::size_t n = spec.fft_size();
  std::vector<cdouble> sym(p.samples.begin() + static_cast<long>(spec.ltf_symbol_begin(0)),
                           p.samples.begin() + static_cast<long>(spec.ltf_symbol_begin(0) + n));
  fft_inplace(sym, /*inverse=*/false);
  std::array<cdouble, kNumOccupied> ref{};
  const auto& ks = occupied_subcarriers();
  for (std::size_t i = 0; i < ks.size(); ++i) ref[i] = sym[subcarrier_bin(ks[i], n)];
  return ref;
}

void normalize_power_inplace(std::span<cdouble> x) {
  const double p = mean_power(x);
  if (!(p > 0.0)) throw std::invalid_argument("zero-energy signal");
  const double s = 1.0 / std::sqrt(p);
  for (cdouble& v : x) v *= s;
}

void normalize_power_inplace(std::span<cfloat> x) {
  double e = 0.0;
  for (const cfloat& v : x) e += std::norm(cdouble(v));
  if (!(e > 0.0)) throw std::invalid_argument("zero-energy signal");
  const float s = static_cast<float>(1.0 / std::sqrt(e / static_cast<double>(x.size())));
  for (cfloat& v : x) v *= s;
}

ComplexSignal normalize_power(const ComplexSignal& sig) {
  ComplexSignal out = sig;
  normalize_power_inplace(out.samples);
  return out;
}

}  // namespace rfp::preamble
