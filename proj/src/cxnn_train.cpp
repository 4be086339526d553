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
#include <limits>
#include <numeric>

#include "rfp/cxnn.hpp"

namespace rfp::nn {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (!(cfg.weight_decay >= 0.0) || !std::isfinite(cfg.weight_decay)) {
    throw std::invalid_argument("weight_decay must be >= 0");
  }
}

namespace {

void check_set(const PacketSet& set, const NetworkSpec& spec, int n_classes, const char* what) {
  if (set.size() == 0) throw std::invalid_argument(std::string(what) + " set is empty");
  if (set.packet_length != static_cast<std::size_t>(spec.input_len)) {
    throw std::invalid_argument(std::string(what) + " packet length does not match the network input");
  }
  if (set.samples.size() != set.size() * set.packet_length) {
    throw std::invalid_argument(std::string(what) + " set is malformed");
  }
  for (int y : set.labels) {
    if (y < 0 || y >= n_classes) throw std::invalid_argument(std::string(what) + " label out of range");
  }
}

// Mean cross-entropy and accuracy of posteriors against labels.
std::pair<double, double> score(const std::vector<double>& probs, const std::vector<int>& labels, int c_n) {
  double loss = 0.0;
  int correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double* p = probs.data() + i * c_n;
    loss -= std::log(std::max(p[labels[i]], 1e-300));
    if (std::max_element(p, p + c_n) - p == labels[i]) ++correct;
  }
  const double n = static_cast<double>(labels.size());
  return {loss / n, correct / n};
}

}  // namespace

template <typename T>
TrainHistory train(Network<T>& net, const PacketSet& train_set, const PacketSet* val_set, const TrainConfig& cfg,
                   const EpochCallback& on_epoch) {
  validate(cfg);
  const int c_n = net.num_classes();
  check_set(train_set, net.spec(), c_n, "training");
  if (val_set != nullptr) check_set(*val_set, net.spec(), c_n, "validation");

  const std::size_t n = train_set.size();
  const std::size_t len = train_set.packet_length;
  std::vector<std::size_t> order(n);
  std::vector<cfloat> batch_x;
  std::vector<int> batch_y;
  AdamState<T> adam;
  const AdamConfig adam_cfg{cfg.learning_rate};
  TrainHistory history;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng({cfg.seed, Stream::kShuffle, 0, static_cast<std::uint64_t>(epoch), 0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    Rng dropout_rng = make_rng({cfg.seed, Stream::kDropout, 0, static_cast<std::uint64_t>(epoch), 0});

    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t b = std::min<std::size_t>(cfg.batch_size, n - start);
      batch_x.resize(b * len);
      batch_y.resize(b);
      for (std::size_t i = 0; i < b; ++i) {
        const auto pkt = train_set.packet(order[start + i]);
        std::copy(pkt.begin(), pkt.end(), batch_x.begin() + static_cast<long>(i * len));
        batch_y[i] = train_set.labels[order[start + i]];
      }
      const Tensor<T> x = net.make_input(std::span<const cfloat>(batch_x), static_cast<int>(b));
      net.zero_grads();
      const auto [loss, hits] = net.loss_and_backward(x, batch_y, cfg.weight_decay, /*training=*/true, &dropout_rng);
      if (!std::isfinite(loss)) throw std::runtime_error("training diverged (non-finite loss)");
      adam_step<T>(net.params(), net.grads(), adam, adam_cfg);
      loss_sum += loss * static_cast<double>(b);
      correct += hits;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(n);
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    stats.val_loss = std::numeric_limits<double>::quiet_NaN();
    stats.val_accuracy = std::numeric_limits<double>::quiet_NaN();
    if (val_set != nullptr) {
      const auto probs = net.predict_proba(val_set->samples, static_cast<int>(val_set->size()));
      std::tie(stats.val_loss, stats.val_accuracy) = score(probs, val_set->labels, c_n);
    }
    history.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

template TrainHistory train<float>(Network<float>&, const PacketSet&, const PacketSet*, const TrainConfig&,
                                   const EpochCallback&);
template TrainHistory train<double>(Network<double>&, const PacketSet&, const PacketSet*, const TrainConfig&,
                                    const EpochCallback&);

// ---------------------------------------------------------------------------
// Filter visualization.

namespace {

template <typename T>
Tensor<T> to_tensor(const NetworkSpec& spec, const std::vector<cdouble>& x) {
  Tensor<T> t;
  const int len = static_cast<int>(x.size());
  if (spec.complex_input) {
    t.resize(1, len, 1, true);
    for (int i = 0; i < len; ++i) t.cx[static_cast<std::size_t>(i)] = std::complex<T>(x[static_cast<std::size_t>(i)]);
  } else {
    t.resize(1, len, 2, false);
    for (int i = 0; i < len; ++i) {
      t.re[2 * static_cast<std::size_t>(i)] = static_cast<T>(x[static_cast<std::size_t>(i)].real());
      t.re[2 * static_cast<std::size_t>(i) + 1] = static_cast<T>(x[static_cast<std::size_t>(i)].imag());
    }
  }
  return t;
}

void project_unit_power(std::vector<cdouble>& x) {
  double e = 0.0;
  for (const cdouble& v : x) e += std::norm(v);
  const double k = std::sqrt(static_cast<double>(x.size()) / e);
  for (cdouble& v : x) v *= k;
}

}  // namespace

template <typename T>
std::vector<cdouble> visualize_filter(Network<T>& net, std::size_t layer_index, int filter_index, int steps,
                                      std::uint64_t seed, std::vector<double>* objective_trace) {
  const NetworkSpec& spec = net.spec();
  if (layer_index >= spec.layers.size()) throw std::invalid_argument("layer index out of range");
  const LayerKind kind = spec.layers[layer_index].kind;
  if (kind != LayerKind::kComplexConv && kind != LayerKind::kRealConv) {
    throw std::invalid_argument("filter visualization needs a convolutional layer");
  }
  if (spec.input_channels != (spec.complex_input ? 1 : 2)) {
    throw std::invalid_argument("filter visualization needs single-stream input");
  }
  const int c_out = spec.layers[layer_index].out_ch;
  if (filter_index < 0 || filter_index >= c_out) throw std::invalid_argument("filter index out of range");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");

  const int len = receptive_field(spec, layer_index);
  const std::size_t end = layer_index + 1;
  const std::vector<T> saved_grads = net.grads();

  auto objective = [&](const std::vector<cdouble>& x) {
    const Tensor<T>& y = net.forward(to_tensor<T>(spec, x), false, nullptr, end);
    double acc = 0.0;
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const std::size_t i = r * c_out + static_cast<std::size_t>(filter_index);
      acc += y.is_complex ? std::abs(std::complex<double>(y.cx[i])) : std::abs(static_cast<double>(y.re[i]));
    }
    return acc / static_cast<double>(y.rows());
  };

  Rng rng = make_rng({seed, Stream::kVisualize, layer_index, static_cast<std::uint64_t>(filter_index), 0});
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cdouble> x(static_cast<std::size_t>(len));
  for (cdouble& v : x) v = {gauss(rng), gauss(rng)};
  project_unit_power(x);

  double value = objective(x);
  double step = 0.1;
  for (int it = 0; it < steps; ++it) {
    const Tensor<T>& y = net.forward(to_tensor<T>(spec, x), false, nullptr, end);
    Tensor<T> g;
    g.resize(y.batch, y.time, y.channels, y.is_complex);
    const double inv_rows = 1.0 / static_cast<double>(y.rows());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const std::size_t i = r * c_out + static_cast<std::size_t>(filter_index);
      if (y.is_complex) {
        const double m = std::abs(std::complex<double>(y.cx[i]));
        if (m > 0.0) g.cx[i] = std::complex<T>(std::complex<double>(y.cx[i]) * (inv_rows / m));
      } else {
        const double v = static_cast<double>(y.re[i]);
        g.re[i] = static_cast<T>(v > 0.0 ? inv_rows : (v < 0.0 ? -inv_rows : 0.0));
      }
    }
    const Tensor<T> gx = net.backward_from(g, end, /*need_input_grad=*/true);
    std::vector<cdouble> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      grad[i] = spec.complex_input ? cdouble(gx.cx[i])
                                   : cdouble(static_cast<double>(gx.re[2 * i]), static_cast<double>(gx.re[2 * i + 1]));
    }
    double gnorm = 0.0;
    for (const cdouble& v : grad) gnorm += std::norm(v);
    gnorm = std::sqrt(gnorm);
    if (!(gnorm > 0.0)) break;

    // Backtracking: accept only steps that do not lower the objective.
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      std::vector<cdouble> cand(x.size());
      const double k = step * std::sqrt(static_cast<double>(x.size())) / gnorm;
      for (std::size_t i = 0; i < x.size(); ++i) cand[i] = x[i] + k * grad[i];
      project_unit_power(cand);
      const double v = objective(cand);
      if (v >= value) {
        x.swap(cand);
        value = v;
        accepted = true;
        step = std::min(step * 1.5, 1.0);
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;
    if (objective_trace != nullptr) objective_trace->push_back(value);
  }
  net.grads() = saved_grads;
  return x;
}

template std::vector<cdouble> visualize_filter<float>(Network<float>&, std::size_t, int, int, std::uint64_t,
                                                      std::vector<double>*);
template std::vector<cdouble> visualize_filter<double>(Network<double>&, std::size_t, int, int, std::uint64_t,
                                                       std::vector<double>*);

}  // namespace rfp::nn
