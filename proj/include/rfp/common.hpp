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

#ifndef RFP_COMMON_HPP_
#define RFP_COMMON_HPP_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfp {

using cdouble = std::complex<double>;
using cfloat = std::complex<float>;

inline constexpr double kPi = 3.14159265358979323846;

// Errors raised by the core. The C API maps each type onto an error code.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Purposes for keyed random streams. Values are part of the on-disk
// reproducibility contract; never renumber.
enum class Stream : std::uint64_t {
  kProfiles = 1,
  kNoise = 2,
  kDayCfo = 3,
  kDayChannel = 4,
  kAugment = 5,
  kTta = 6,
  kInit = 7,
  kShuffle = 8,
  kDropout = 9,
  kVisualize = 10,
  kFolds = 11,
  kRun = 12,
};

// Identifies one independent random stream. Any two distinct keys yield
// statistically independent generators, so work keyed this way can be
// evaluated in any order.
struct RngKey {
  std::uint64_t master_seed = 0;
  Stream purpose = Stream::kNoise;
  std::uint64_t device = 0;
  std::uint64_t day = 0;
  std::uint64_t packet = 0;
};

using Rng = std::mt19937_64;

std::uint64_t mix_key(const RngKey& key);
Rng make_rng(const RngKey& key);

// Derives a child seed from a parent seed and an index (splitmix64 chain).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace rfp

#endif  // RFP_COMMON_HPP_
