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

#include <algorithm>
#include <cmath>

#include "rfp/harness.hpp"

namespace rfp::harness {

namespace {

// Sub-streams of Stream::kAugment / Stream::kTta, carried in the device slot.
constexpr std::uint64_t kCfoDraw = 0;
constexpr std::uint64_t kChannelDraw = 1;
// Packet slot for parameters shared by all packets (orthogonal assignment).
constexpr std::uint64_t kShared = ~std::uint64_t{0};

AugDraw make_draw(const AugmentationPolicy& p, Stream stream, std::uint64_t seed, std::uint64_t copy,
                  std::uint64_t packet, double sample_rate_hz) {
  AugDraw d;
  if (p.has_cfo()) {
    const std::uint64_t slot = p.effective_cfo_assignment() == Assignment::kOrthogonal ? kShared : packet;
    Rng rng = make_rng({seed, stream, kCfoDraw, copy, slot});
    d.cfo_ppm = p.cfo.draw(rng);
  }
  if (p.has_channel()) {
    const std::uint64_t slot = p.assignment == Assignment::kOrthogonal ? kShared : packet;
    Rng rng = make_rng({seed, stream, kChannelDraw, copy, slot});
    d.channel = confounders::sample_epa_channel(rng, sample_rate_hz);
  }
  return d;
}

}  // namespace

double CfoDistribution::draw(Rng& rng) const {
  if (kind == Kind::kBernoulli) {
    std::bernoulli_distribution coin(0.5);
    return coin(rng) ? hi_ppm : lo_ppm;
  }
  std::uniform_real_distribution<double> u(lo_ppm, hi_ppm);
  return u(rng);
}

void validate(const AugmentationPolicy& p) {
  if (p.multiplier < 1) throw std::invalid_argument("augmentation multiplier must be >= 1");
  if (!std::isfinite(p.cfo.lo_ppm) || !std::isfinite(p.cfo.hi_ppm) || p.cfo.lo_ppm > p.cfo.hi_ppm) {
    throw std::invalid_argument("CFO augmentation range must satisfy lo <= hi");
  }
}

std::string to_string(AugKind k) {
  switch (k) {
    case AugKind::kNone:
      return "none";
    case AugKind::kCfo:
      return "cfo";
    case AugKind::kChannel:
      return "channel";
    case AugKind::kCfoChannel:
      return "cfo+channel";
  }
  return "?";
}

AugKind aug_kind_from_string(const std::string& s) {
  if (s == "none") return AugKind::kNone;
  if (s == "cfo") return AugKind::kCfo;
  if (s == "channel") return AugKind::kChannel;
  if (s == "cfo+channel") return AugKind::kCfoChannel;
  throw std::invalid_argument("unknown augmentation kind '" + s + "'");
}

std::string to_string(Assignment a) { return a == Assignment::kOrthogonal ? "orthogonal" : "random"; }

Assignment assignment_from_string(const std::string& s) {
  if (s == "random") return Assignment::kRandom;
  if (s == "orthogonal") return Assignment::kOrthogonal;
  throw std::invalid_argument("unknown assignment '" + s + "'");
}

std::string to_string(TtaReduce r) { return r == TtaReduce::kLogitMean ? "logit_mean" : "softmax_mean"; }

TtaReduce tta_reduce_from_string(const std::string& s) {
  if (s == "softmax_mean") return TtaReduce::kSoftmaxMean;
  if (s == "logit_mean") return TtaReduce::kLogitMean;
  throw std::invalid_argument("unknown TTA reduction '" + s + "'");
}

void apply_draw(std::vector<cdouble>& x, const AugDraw& draw, const preamble::PreambleSpec& spec) {
  if (draw.channel) confounders::apply_channel_inplace(x, *draw.channel);
  if (draw.cfo_ppm) {
    confounders::apply_cfo_inplace(
        x, confounders::ppm_to_theta(*draw.cfo_ppm, spec.carrier_freq_hz, spec.sample_rate_hz()));
  }
}

AugmentedSet augment_train(const PacketSet& packets, const AugmentationPolicy& policy, std::uint64_t seed,
                           const preamble::PreambleSpec& spec) {
  validate(policy);
  const std::size_t n = packets.size();
  const std::size_t len = packets.packet_length;
  AugmentedSet out;
  out.packets.packet_length = len;
  if (policy.kind == AugKind::kNone) {
    for (int k = 0; k < policy.multiplier; ++k) {
      out.packets.samples.insert(out.packets.samples.end(), packets.samples.begin(), packets.samples.end());
      out.packets.labels.insert(out.packets.labels.end(), packets.labels.begin(), packets.labels.end());
    }
    out.draws.resize(out.packets.size());
    return out;
  }

  out.packets.samples.resize(n * len * static_cast<std::size_t>(policy.multiplier));
  out.packets.labels.resize(n * static_cast<std::size_t>(policy.multiplier));
  out.draws.resize(out.packets.labels.size());
  const double fs = spec.sample_rate_hz();
  std::vector<cdouble> buf(len);
  for (int k = 0; k < policy.multiplier; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t o = static_cast<std::size_t>(k) * n + i;
      const AugDraw d = make_draw(policy, Stream::kAugment, seed, static_cast<std::uint64_t>(k), i, fs);
      const auto src = packets.packet(i);
      std::copy(src.begin(), src.end(), buf.begin());
      apply_draw(buf, d, spec);
      preamble::normalize_power_inplace(buf);
      to_float(buf, out.packets.packet(o));
      out.packets.labels[o] = packets.labels[i];
      out.draws[o] = d;
    }
  }
  return out;
}

std::vector<double> predict_tta(nn::Network<float>& net, const PacketSet& packets, const AugmentationPolicy& policy,
                                int n_tta, std::uint64_t seed, const preamble::PreambleSpec& spec) {
  if (n_tta < 0) throw std::invalid_argument("n_tta must be >= 0");
  validate(policy);
  const int n = static_cast<int>(packets.size());
  if (n_tta == 0) return net.predict_proba(packets.samples, n);

  const int c_n = net.num_classes();
  const std::size_t len = packets.packet_length;
  const double fs = spec.sample_rate_hz();
  // Group packets so each forward batch holds roughly 200 augmented copies.
  const int group = std::max(1, 200 / n_tta);
  std::vector<double> out(static_cast<std::size_t>(n) * c_n, 0.0);
  std::vector<cfloat> copies;
  std::vector<cdouble> buf(len);
  for (int start = 0; start < n; start += group) {
    const int g = std::min(group, n - start);
    copies.resize(static_cast<std::size_t>(g) * n_tta * len);
    for (int i = 0; i < g; ++i) {
      const auto src = packets.packet(static_cast<std::size_t>(start + i));
      for (int k = 0; k < n_tta; ++k) {
        const AugDraw d = make_draw(policy, Stream::kTta, seed, static_cast<std::uint64_t>(k),
                                    static_cast<std::uint64_t>(start + i), fs);
        std::copy(src.begin(), src.end(), buf.begin());
        apply_draw(buf, d, spec);
        preamble::normalize_power_inplace(buf);
        to_float(buf, std::span<cfloat>(copies.data() + (static_cast<std::size_t>(i) * n_tta + k) * len, len));
      }
    }
    const bool logits = policy.tta_reduce == TtaReduce::kLogitMean;
    const auto scores = logits ? net.predict_logits(copies, g * n_tta) : net.predict_proba(copies, g * n_tta);
    for (int i = 0; i < g; ++i) {
      double* dst = out.data() + static_cast<std::size_t>(start + i) * c_n;
      for (int k = 0; k < n_tta; ++k) {
        const double* s = scores.data() + (static_cast<std::size_t>(i) * n_tta + k) * c_n;
        for (int c = 0; c < c_n; ++c) dst[c] += s[c] / n_tta;
      }
      if (logits) {
        const double mx = *std::max_element(dst, dst + c_n);
        double sum = 0.0;
        for (int c = 0; c < c_n; ++c) sum += (dst[c] = std::exp(dst[c] - mx));
        for (int c = 0; c < c_n; ++c) dst[c] /= sum;
      }
    }
  }
  return out;
}

std::vector<int> argmax_rows(std::span<const double> probs, int n_classes) {
  if (n_classes < 1 || probs.size() % static_cast<std::size_t>(n_classes) != 0) {
    throw std::invalid_argument("probability matrix shape mismatch");
  }
  std::vector<int> out(probs.size() / static_cast<std::size_t>(n_classes));
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* p = probs.data() + r * n_classes;
    out[r] = static_cast<int>(std::max_element(p, p + n_classes) - p);
  }
  return out;
}

Metrics metrics(std::span<const int> predictions, std::span<const int> labels, int n_classes) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("prediction/label count mismatch");
  if (n_classes < 1) throw std::invalid_argument("n_classes must be >= 1");
  Metrics m;
  m.confusion.assign(static_cast<std::size_t>(n_classes), std::vector<int>(static_cast<std::size_t>(n_classes), 0));
  int correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i], p = predictions[i];
    if (y < 0 || y >= n_classes || p < 0 || p >= n_classes) throw std::invalid_argument("class index out of range");
    ++m.confusion[static_cast<std::size_t>(y)][static_cast<std::size_t>(p)];
    if (y == p) ++correct;
  }
  m.accuracy = labels.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(labels.size());
  return m;
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace rfp::harness
