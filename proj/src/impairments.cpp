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

#include "rfp/impairments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rfp::impairments {
namespace {

std::vector<double> uniform_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  }
  return g;
}

std::vector<std::size_t> shuffled_indices(int n, Rng& rng) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
  return idx;
}

}  // namespace

void validate(const DeviceProfile& p) {
  if (!(p.epsilon >= 0.0 && p.epsilon <= kMaxEpsilon + 1e-12)) {
    throw std::invalid_argument("epsilon outside [0, 0.2]");
  }
  if (!(std::abs(p.phi) <= kMaxPhi + 1e-12)) throw std::invalid_argument("|phi| exceeds pi/30");
  if (!(p.p1db >= kMinP1dB - 1e-12 && p.p1db <= kMaxP1dB + 1e-12)) {
    throw std::invalid_argument("p1db outside [8.45, 20]");
  }
}

std::vector<DeviceProfile> assign_profiles(int n_devices, std::uint64_t seed) {
  if (n_devices < 1) throw std::invalid_argument("n_devices must be >= 1");
  const auto eps = uniform_grid(0.0, kMaxEpsilon, n_devices);
  const auto phi = uniform_grid(-kMaxPhi, kMaxPhi, n_devices);
  const auto p1db = uniform_grid(kMinP1dB, kMaxP1dB, n_devices);

  Rng rng = make_rng({seed, Stream::kProfiles, 0, 0, 0});
  const auto pe = shuffled_indices(n_devices, rng);
  const auto pp = shuffled_indices(n_devices, rng);
  const auto pa = shuffled_indices(n_devices, rng);

  std::vector<DeviceProfile> out(static_cast<std::size_t>(n_devices));
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d].device_id = static_cast<int>(d);
    out[d].epsilon = eps[pe[d]];
    out[d].phi = phi[pp[d]];
    out[d].p1db = p1db[pa[d]];
  }
  return out;
}

cdouble iq_imbalance_sample(cdouble x, double epsilon, double phi) {
  const double gi = 1.0 + epsilon / 2.0;
  const double gq = 1.0 - epsilon / 2.0;
  const double c = std::cos(phi / 2.0);
  const double s = std::sin(phi / 2.0);
  const double i = x.real();
  const double q = x.imag();
  return {gi * c * i + gq * s * q, gi * s * i + gq * c * q};
}

ComplexSignal apply_iq_imbalance(const ComplexSignal& sig, double epsilon, double phi) {
  ComplexSignal out = sig;
  for (cdouble& v : out.samples) v = iq_imbalance_sample(v, epsilon, phi);
  return out;
}

cdouble pa_sample(cdouble x, double p1db) {
  const double mag2 = std::norm(x);
  if (mag2 <= p1db / 0.44) return x * (1.0 - 0.44 * mag2 / (3.0 * p1db));
  return x / std::sqrt(mag2) * std::sqrt(p1db);
}

ComplexSignal apply_pa(const ComplexSignal& sig, double p1db) {
  if (!(p1db > 0.0)) throw std::invalid_argument("p1db must be positive");
  ComplexSignal out = sig;
  for (cdouble& v : out.samples) v = pa_sample(v, p1db);
  return out;
}

ComplexSignal apply_device(const ComplexSignal& sig, const DeviceProfile& profile) {
  return apply_pa(apply_iq_imbalance(sig, profile.epsilon, profile.phi), profile.p1db);
}

double compute_evm_db(const ComplexSignal& distorted, const ComplexSignal& reference) {
  if (distorted.size() != reference.size()) throw std::invalid_argument("length mismatch");
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    err += std::norm(distorted.samples[i] - reference.samples[i]);
    ref += std::norm(reference.samples[i]);
  }
  if (!(ref > 0.0)) throw std::invalid_argument("zero-energy reference");
  if (err == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(err / ref);
}

}  // namespace rfp::impairments
