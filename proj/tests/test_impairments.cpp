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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "rfp/impairments.hpp"
#include "rfp/preamble.hpp"
#include "test_util.hpp"

namespace rfp::impairments {
namespace {

// Upconvert with mismatched I and Q mixer branches, then downconvert with an
// ideal receiver. Averaging over a whole carrier period is the low-pass filter.
cdouble rf_mixer_oracle(cdouble x, double eps, double phi) {
  const int m = 64;
  double i_acc = 0.0, q_acc = 0.0;
  for (int k = 0; k < m; ++k) {
    const double wt = 2.0 * kPi * k / m;
    const double rf = x.real() * (1.0 + eps / 2.0) * std::cos(wt + phi / 2.0) -
                      x.imag() * (1.0 - eps / 2.0) * std::sin(wt - phi / 2.0);
    i_acc += 2.0 * rf * std::cos(wt);
    q_acc += -2.0 * rf * std::sin(wt);
  }
  return {i_acc / m, q_acc / m};
}

TEST(IqImbalance, MatchesMixerOracle) {
  Rng rng(3);
  std::uniform_real_distribution<double> ue(0.0, kMaxEpsilon), up(-kMaxPhi, kMaxPhi), ux(-2.0, 2.0);
  for (int t = 0; t < 1000; ++t) {
    const double eps = ue(rng), phi = up(rng);
    const cdouble x(ux(rng), ux(rng));
    ASSERT_LT(std::abs(iq_imbalance_sample(x, eps, phi) - rf_mixer_oracle(x, eps, phi)), 1e-12);
  }
}

TEST(IqImbalance, IdentityWhenMatched) {
  Rng rng(4);
  ComplexSignal s{test::random_complex(100, rng), 1.0};
  const ComplexSignal out = apply_iq_imbalance(s, 0.0, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(out.samples[i], s.samples[i]);
}

TEST(IqImbalance, IsRealLinear) {
  Rng rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    const cdouble a(g(rng), g(rng)), b(g(rng), g(rng));
    const double alpha = g(rng), beta = g(rng);
    const cdouble lhs = iq_imbalance_sample(alpha * a + beta * b, 0.13, -0.07);
    const cdouble rhs = alpha * iq_imbalance_sample(a, 0.13, -0.07) + beta * iq_imbalance_sample(b, 0.13, -0.07);
    ASSERT_LT(std::abs(lhs - rhs), 1e-12);
  }
}

TEST(PowerAmplifier, SmallSignalIsLinearAndPhasePreserving) {
  for (double p : {kMinP1dB, 12.0, kMaxP1dB}) {
    const cdouble x = std::polar(1e-4, 0.7);
    const cdouble y = pa_sample(x, p);
    EXPECT_NEAR(std::abs(y) / std::abs(x), 1.0, 1e-8);
    EXPECT_NEAR(std::arg(y), 0.7, 1e-15);
  }
}

TEST(PowerAmplifier, CubicCoefficientBelowSaturation) {
  // Third-order Taylor term of the model: y = x - (0.44 / 3P) |x|^2 x.
  const double p = 10.0;
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    const cdouble x = std::polar(r, -1.1);
    const cdouble expect = x - 0.44 / (3.0 * p) * r * r * x;
    EXPECT_LT(std::abs(pa_sample(x, p) - expect), 1e-12) << r;
  }
}

TEST(PowerAmplifier, SaturatesAtRootP) {
  const double p = 9.0;
  for (double r : {5.0, 10.0, 100.0}) {
    const cdouble y = pa_sample(std::polar(r, 2.0), p);
    EXPECT_NEAR(std::abs(y), 3.0, 1e-12);
    EXPECT_NEAR(std::arg(y), 2.0, 1e-12);
  }
}

TEST(PowerAmplifier, PropertyMagnitudeMonotoneAndNearlyContinuous) {
  for (double p : {kMinP1dB, 14.0, kMaxP1dB}) {
    double prev = 0.0;
    for (int i = 1; i <= 20000; ++i) {
      const double r = 8.0 * i / 20000.0;
      const double out = std::abs(pa_sample(cdouble(r, 0.0), p));
      // The knee joins the cubic branch to the clip level within 1%.
      ASSERT_GE(out, prev * 0.99) << "p=" << p << " r=" << r;
      ASSERT_LE(out, std::sqrt(p) * 1.01);
      prev = out;
    }
  }
}

TEST(AssignProfiles, EachGridValueUsedOnce) {
  const int n = 19;
  const auto profiles = assign_profiles(n, 77);
  ASSERT_EQ(profiles.size(), 19u);
  std::vector<double> eps, phi, p;
  for (const auto& d : profiles) {
    eps.push_back(d.epsilon);
    phi.push_back(d.phi);
    p.push_back(d.p1db);
  }
  std::sort(eps.begin(), eps.end());
  std::sort(phi.begin(), phi.end());
  std::sort(p.begin(), p.end());
  for (int i = 0; i < n; ++i) {
    EXPECT_NEAR(eps[static_cast<std::size_t>(i)], kMaxEpsilon * i / (n - 1), 1e-15);
    EXPECT_NEAR(phi[static_cast<std::size_t>(i)], -kMaxPhi + 2.0 * kMaxPhi * i / (n - 1), 1e-15);
    EXPECT_NEAR(p[static_cast<std::size_t>(i)], kMinP1dB + (kMaxP1dB - kMinP1dB) * i / (n - 1), 1e-12);
  }
}

TEST(AssignProfiles, DeterministicPerSeedAndDistinctDevices) {
  const auto a = assign_profiles(19, 5);
  const auto b = assign_profiles(19, 5);
  const auto c = assign_profiles(19, 6);
  bool differs = false;
  std::set<std::tuple<double, double, double>> seen;
  for (std::size_t d = 0; d < a.size(); ++d) {
    EXPECT_EQ(a[d].epsilon, b[d].epsilon);
    EXPECT_EQ(a[d].phi, b[d].phi);
    EXPECT_EQ(a[d].p1db, b[d].p1db);
    differs |= a[d].epsilon != c[d].epsilon || a[d].phi != c[d].phi;
    seen.insert({a[d].epsilon, a[d].phi, a[d].p1db});
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(seen.size(), 19u);
}

TEST(AssignProfiles, RejectsEmpty) { EXPECT_THROW(assign_profiles(0, 1), std::invalid_argument); }

TEST(Evm, KnownValues) {
  Rng rng(8);
  ComplexSignal ref{test::random_complex(500, rng), 1.0};
  EXPECT_EQ(compute_evm_db(ref, ref), -std::numeric_limits<double>::infinity());
  ComplexSignal scaled = ref;
  for (cdouble& v : scaled.samples) v *= 1.1;
  EXPECT_NEAR(compute_evm_db(scaled, ref), 20.0 * std::log10(0.1), 1e-9);
  ComplexSignal short_sig{std::vector<cdouble>(3), 1.0};
  EXPECT_THROW(compute_evm_db(short_sig, ref), std::invalid_argument);
}

// Closed form for a unit-power circular input with small distortion: the IQ
// error power per sample follows directly from the 2x2 real matrix.
TEST(Evm, IqOnlyMatchesMatrixOracle) {
  const double eps = 0.1, phi = 0.05;
  const double gi = 1 + eps / 2, gq = 1 - eps / 2, c = std::cos(phi / 2), s = std::sin(phi / 2);
  // E|(M - I) v|^2 for v with E[I^2] = E[Q^2] = 1/2 and E[IQ] = 0.
  const double fro = (gi * c - 1) * (gi * c - 1) + (gq * s) * (gq * s) + (gi * s) * (gi * s) + (gq * c - 1) * (gq * c - 1);
  const double expect_db = 10.0 * std::log10(fro / 2.0);
  Rng rng(9);
  ComplexSignal ref{test::random_complex(200000, rng, std::sqrt(0.5)), 1.0};
  const double got = compute_evm_db(apply_iq_imbalance(ref, eps, phi), ref);
  EXPECT_NEAR(got, expect_db, 0.05);
}

TEST(ApplyDevice, IsPaAfterIq) {
  const DeviceProfile d{3, 0.15, -0.08, 9.5};
  const ComplexSignal pre = preamble::generate_preamble({.oversample_factor = 2});
  const ComplexSignal a = apply_device(pre, d);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    const cdouble expect = pa_sample(iq_imbalance_sample(pre.samples[i], d.epsilon, d.phi), d.p1db);
    ASSERT_EQ(a.samples[i], expect);
  }
}

}  // namespace
}  // namespace rfp::impairments
