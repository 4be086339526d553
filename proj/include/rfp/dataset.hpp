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

#ifndef RFP_DATASET_HPP_
#define RFP_DATASET_HPP_

#include <span>
#include <vector>

#include "rfp/common.hpp"

namespace rfp {

// Contiguous fixed-length packets with integer labels. Samples are stored as
// 32-bit complex floats, packet after packet.
struct PacketSet {
  std::size_t packet_length = 0;
  std::vector<cfloat> samples;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<cfloat> packet(std::size_t i) {
    return {samples.data() + i * packet_length, packet_length};
  }
  std::span<const cfloat> packet(std::size_t i) const {
    return {samples.data() + i * packet_length, packet_length};
  }
  void reserve(std::size_t n) {
    samples.reserve(n * packet_length);
    labels.reserve(n);
  }
  void push_back(std::span<const cfloat> x, int label);
  void push_back(std::span<const cdouble> x, int label);
};

inline void PacketSet::push_back(std::span<const cfloat> x, int label) {
  if (x.size() != packet_length) throw std::invalid_argument("packet length mismatch");
  samples.insert(samples.end(), x.begin(), x.end());
  labels.push_back(label);
}

inline void PacketSet::push_back(std::span<const cdouble> x, int label) {
  if (x.size() != packet_length) throw std::invalid_argument("packet length mismatch");
  for (const cdouble& v : x) samples.emplace_back(static_cast<float>(v.real()), static_cast<float>(v.imag()));
  labels.push_back(label);
}

}  // namespace rfp

#endif  // RFP_DATASET_HPP_
