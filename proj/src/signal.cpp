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

#include "rfp/signal.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace rfp {

void validate(const ComplexSignal& sig) {
  if (sig.samples.empty()) throw std::invalid_argument("empty signal");
  if (!(sig.sample_rate_hz > 0.0) || !std::isfinite(sig.sample_rate_hz)) {
    throw std::invalid_argument("sample rate must be positive");
  }
  for (const cdouble& s : sig.samples) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      throw std::invalid_argument("signal contains non-finite samples");
    }
  }
}

double energy(std::span<const cdouble> x) {
  double e = 0.0;
  for (const cdouble& s : x) e += std::norm(s);
  return e;
}

double mean_power(std::span<const cdouble> x) {
  if (x.empty()) return 0.0;
  return energy(x) / static_cast<double>(x.size());
}

ComplexSignal to_signal(std::span<const cfloat> x, double sample_rate_hz) {
  ComplexSignal sig;
  sig.sample_rate_hz = sample_rate_hz;
  sig.samples.assign(x.begin(), x.end());
  return sig;
}

void to_float(std::span<const cdouble> x, std::span<cfloat> out) {
  if (x.size() != out.size()) throw std::invalid_argument("size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = cfloat(x[i]);
}

namespace {

// FFTW's planner is not re-entrant; plans are created once per (size, sign)
// under a lock and executed with the thread-safe new-array interface.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find({n, sign});
    if (it != plans_.end()) return it->second;
    std::vector<cdouble> scratch(static_cast<std::size_t>(n));
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(std::make_pair(n, sign), plan);
    return plan;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

void fft_inplace(std::span<cdouble> data, bool inverse) {
  if (data.empty()) return;
  const int n = static_cast<int>(data.size());
  fftw_plan plan = plan_cache().get(n, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
  if (inverse) {
    const double scale = 1.0 / n;
    for (cdouble& v : data) v *= scale;
  }
}

}  // namespace rfp
