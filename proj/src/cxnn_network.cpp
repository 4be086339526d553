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

#include <cmath>
#include <limits>
#include <numeric>

#include "cxnn_layers.hpp"

namespace rfp::nn {

template <typename T>
void Tensor<T>::resize(int b, int t, int c, bool complex_data) {
  batch = b;
  time = t;
  channels = c;
  is_complex = complex_data;
  const std::size_t n = static_cast<std::size_t>(b) * t * c;
  if (complex_data) {
    cx.resize(n);
  } else {
    re.resize(n);
  }
}

template <typename T>
Network<T>::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  build();
}

template <typename T>
Network<T>::~Network() = default;

template <typename T>
Network<T>::Network(const Network& other) : spec_(other.spec_) {
  build();
  params_ = other.params_;
}

template <typename T>
Network<T>& Network<T>::operator=(const Network& other) {
  if (this != &other) {
    spec_ = other.spec_;
    build();
    params_ = other.params_;
  }
  return *this;
}

template <typename T>
Network<T>::Network(Network&&) noexcept = default;
template <typename T>
Network<T>& Network<T>::operator=(Network&&) noexcept = default;

template <typename T>
void Network<T>::build() {
  shapes_ = propagate_shapes(spec_);
  layers_.clear();
  blocks_.clear();
  std::size_t total = 0;
  std::vector<std::size_t> offsets;
  for (const LayerSpec& ls : spec_.layers) {
    layers_.push_back(make_layer<T>(ls));
    offsets.push_back(total);
    layers_.back()->describe(blocks_, total);
    total += layers_.back()->num_params();
  }
  params_.assign(total, T(0));
  grads_.assign(total, T(0));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->bind(params_.data() + offsets[i], grads_.data() + offsets[i]);
  }
  acts_.assign(layers_.size() + 1, Tensor<T>{});
  grad_acts_.assign(layers_.size() + 1, Tensor<T>{});
  cached_end_ = 0;
}

template <typename T>
int Network<T>::num_classes() const {
  return shapes_.back().channels;
}

template <typename T>
void Network<T>::init_glorot(std::uint64_t seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Rng rng = make_rng({seed, Stream::kInit, static_cast<std::uint64_t>(i), 0, 0});
    layers_[i]->init(rng);
  }
}

template <typename T>
void Network<T>::zero_grads() {
  std::fill(grads_.begin(), grads_.end(), T(0));
}

template <typename T>
Tensor<T> Network<T>::make_input(std::span<const cfloat> samples, int batch) const {
  const std::size_t per = static_cast<std::size_t>(spec_.input_len) * (spec_.complex_input ? spec_.input_channels : 1);
  if (samples.size() != per * static_cast<std::size_t>(batch)) throw std::invalid_argument("input size mismatch");
  Tensor<T> t;
  if (spec_.complex_input) {
    t.resize(batch, spec_.input_len, spec_.input_channels, true);
    for (std::size_t i = 0; i < samples.size(); ++i) t.cx[i] = std::complex<T>(samples[i]);
  } else {
    if (spec_.input_channels != 2) throw std::invalid_argument("real networks take re/im as two channels");
    t.resize(batch, spec_.input_len, 2, false);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      t.re[2 * i] = static_cast<T>(samples[i].real());
      t.re[2 * i + 1] = static_cast<T>(samples[i].imag());
    }
  }
  return t;
}

template <typename T>
Tensor<T> Network<T>::make_input(std::span<const cdouble> samples, int batch) const {
  std::vector<cfloat> tmp;
  if constexpr (std::is_same_v<T, double>) {
    const std::size_t per = static_cast<std::size_t>(spec_.input_len) * (spec_.complex_input ? spec_.input_channels : 1);
    if (samples.size() != per * static_cast<std::size_t>(batch)) throw std::invalid_argument("input size mismatch");
    Tensor<T> t;
    if (spec_.complex_input) {
      t.resize(batch, spec_.input_len, spec_.input_channels, true);
      std::copy(samples.begin(), samples.end(), t.cx.begin());
    } else {
      t.resize(batch, spec_.input_len, 2, false);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        t.re[2 * i] = samples[i].real();
        t.re[2 * i + 1] = samples[i].imag();
      }
    }
    return t;
  } else {
    tmp.assign(samples.begin(), samples.end());
    return make_input(std::span<const cfloat>(tmp), batch);
  }
}

template <typename T>
const Tensor<T>& Network<T>::forward(const Tensor<T>& input, bool training, Rng* dropout_rng,
                                     std::optional<std::size_t> end_layer) {
  const std::size_t end = end_layer.value_or(layers_.size());
  if (end > layers_.size()) throw std::invalid_argument("end layer out of range");
  if (input.is_complex != spec_.complex_input) throw std::invalid_argument("input field mismatch");
  acts_[0] = input;
  for (std::size_t i = 0; i < end; ++i) layers_[i]->forward(acts_[i], acts_[i + 1], training, dropout_rng);
  cached_end_ = end;
  return acts_[end];
}

template <typename T>
Tensor<T> Network<T>::backward_from(const Tensor<T>& grad_out, std::size_t end_layer, bool need_input_grad) {
  if (end_layer != cached_end_) throw std::logic_error("backward does not match the cached forward pass");
  grad_acts_[end_layer] = grad_out;
  for (std::size_t i = end_layer; i-- > 0;) {
    Tensor<T>* gin = (i > 0 || need_input_grad) ? &grad_acts_[i] : nullptr;
    layers_[i]->backward(acts_[i], acts_[i + 1], grad_acts_[i + 1], gin);
  }
  return need_input_grad ? grad_acts_[0] : Tensor<T>{};
}

template <typename T>
double Network<T>::weight_penalty() const {
  double s = 0.0;
  for (T v : params_) s += static_cast<double>(v) * static_cast<double>(v);
  return s;
}

template <typename T>
std::pair<double, int> Network<T>::loss_and_backward(const Tensor<T>& input, std::span<const int> labels,
                                                     double weight_decay, bool training, Rng* dropout_rng) {
  std::size_t end = layers_.size();
  if (!spec_.layers.empty() && spec_.layers.back().kind == LayerKind::kSoftmax) --end;
  const Tensor<T>& logits = forward(input, training, dropout_rng, end);
  const int b_n = logits.batch;
  const int c_n = logits.channels;
  if (labels.size() != static_cast<std::size_t>(b_n)) throw std::invalid_argument("label count mismatch");

  Tensor<T> grad;
  grad.resize(b_n, 1, c_n, false);
  double loss = 0.0;
  int correct = 0;
  for (int b = 0; b < b_n; ++b) {
    const T* z = logits.re.data() + static_cast<std::size_t>(b) * c_n;
    T* g = grad.re.data() + static_cast<std::size_t>(b) * c_n;
    const int y = labels[static_cast<std::size_t>(b)];
    if (y < 0 || y >= c_n) throw std::invalid_argument("label out of range");
    const int arg = static_cast<int>(std::max_element(z, z + c_n) - z);
    if (arg == y) ++correct;
    const double mx = static_cast<double>(z[arg]);
    double sum = 0.0;
    for (int c = 0; c < c_n; ++c) sum += std::exp(static_cast<double>(z[c]) - mx);
    const double log_sum = std::log(sum) + mx;
    loss += log_sum - static_cast<double>(z[y]);
    for (int c = 0; c < c_n; ++c) {
      const double p = std::exp(static_cast<double>(z[c]) - log_sum);
      g[c] = static_cast<T>((p - (c == y ? 1.0 : 0.0)) / b_n);
    }
  }
  loss /= b_n;
  backward_from(grad, end, /*need_input_grad=*/false);
  if (weight_decay > 0.0) {
    loss += weight_decay * weight_penalty();
    const T k = static_cast<T>(2.0 * weight_decay);
    for (std::size_t i = 0; i < params_.size(); ++i) grads_[i] += k * params_[i];
  }
  return {loss, correct};
}

template <typename T>
std::vector<double> Network<T>::run_batches(std::span<const cfloat> samples, int n, int batch_size, bool logits) {
  const std::size_t per = static_cast<std::size_t>(spec_.input_len);
  if (samples.size() != per * static_cast<std::size_t>(n)) throw std::invalid_argument("input size mismatch");
  std::size_t end = layers_.size();
  const bool has_softmax = !spec_.layers.empty() && spec_.layers.back().kind == LayerKind::kSoftmax;
  if (logits && has_softmax) --end;
  const int c_n = num_classes();
  std::vector<double> out(static_cast<std::size_t>(n) * c_n);
  for (int start = 0; start < n; start += batch_size) {
    const int b = std::min(batch_size, n - start);
    const Tensor<T> in = make_input(samples.subspan(static_cast<std::size_t>(start) * per, per * b), b);
    const Tensor<T>& y = forward(in, /*training=*/false, nullptr, end);
    for (std::size_t i = 0; i < y.re.size(); ++i) {
      out[static_cast<std::size_t>(start) * c_n + i] = static_cast<double>(y.re[i]);
    }
  }
  if (!logits && !has_softmax) {
    for (int r = 0; r < n; ++r) {
      double* z = out.data() + static_cast<std::size_t>(r) * c_n;
      const double mx = *std::max_element(z, z + c_n);
      double s = 0.0;
      for (int c = 0; c < c_n; ++c) s += (z[c] = std::exp(z[c] - mx));
      for (int c = 0; c < c_n; ++c) z[c] /= s;
    }
  }
  return out;
}

template <typename T>
std::vector<double> Network<T>::predict_proba(std::span<const cfloat> samples, int n, int batch_size) {
  return run_batches(samples, n, batch_size, /*logits=*/false);
}

template <typename T>
std::vector<double> Network<T>::predict_logits(std::span<const cfloat> samples, int n, int batch_size) {
  return run_batches(samples, n, batch_size, /*logits=*/true);
}

template class Network<float>;
template class Network<double>;
template struct Tensor<float>;
template struct Tensor<double>;

// ---------------------------------------------------------------------------
// Standalone operations.

template <typename T>
std::vector<std::complex<T>> complex_conv1d_forward(std::span<const std::complex<T>> x, int time, int in_ch,
                                                    std::span<const std::complex<T>> w, int kernel_len, int out_ch,
                                                    std::span<const std::complex<T>> bias, int stride) {
  if (kernel_len > time) throw std::invalid_argument("kernel longer than input");
  if (x.size() != static_cast<std::size_t>(time) * in_ch) throw std::invalid_argument("input shape mismatch");
  if (w.size() != static_cast<std::size_t>(kernel_len) * in_ch * out_ch) {
    throw std::invalid_argument("weight shape mismatch");
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_ch)) {
    throw std::invalid_argument("bias shape mismatch");
  }
  const LayerSpec spec = LayerSpec::complex_conv(kernel_len, in_ch, out_ch, stride, !bias.empty());
  ComplexConvLayer<T> layer(spec);
  std::vector<T> params(layer.num_params());
  std::vector<T> grads(layer.num_params());
  layer.bind(params.data(), grads.data());
  auto* cp = reinterpret_cast<std::complex<T>*>(params.data());
  std::copy(w.begin(), w.end(), cp);
  std::copy(bias.begin(), bias.end(), cp + w.size());
  Tensor<T> in;
  in.resize(1, time, in_ch, true);
  std::copy(x.begin(), x.end(), in.cx.begin());
  Tensor<T> out;
  layer.forward(in, out, false, nullptr);
  return out.cx;
}

template std::vector<std::complex<float>> complex_conv1d_forward<float>(
    std::span<const std::complex<float>>, int, int, std::span<const std::complex<float>>, int, int,
    std::span<const std::complex<float>>, int);
template std::vector<std::complex<double>> complex_conv1d_forward<double>(
    std::span<const std::complex<double>>, int, int, std::span<const std::complex<double>>, int, int,
    std::span<const std::complex<double>>, int);

std::vector<double> temporal_average(std::span<const double> x, int time, int channels) {
  if (x.size() != static_cast<std::size_t>(time) * channels || time < 1) {
    throw std::invalid_argument("shape mismatch");
  }
  std::vector<double> out(static_cast<std::size_t>(channels), 0.0);
  for (int t = 0; t < time; ++t) {
    for (int c = 0; c < channels; ++c) out[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(t) * channels + c];
  }
  for (double& v : out) v /= time;
  return out;
}

std::vector<double> real_dense_forward(std::span<const double> x, int rows, int in, std::span<const double> w,
                                       std::span<const double> b, int out, bool relu) {
  if (x.size() != static_cast<std::size_t>(rows) * in || w.size() != static_cast<std::size_t>(in) * out ||
      b.size() != static_cast<std::size_t>(out)) {
    throw std::invalid_argument("shape mismatch");
  }
  DenseLayer<double> layer(LayerSpec::dense_per_step(in, out, relu));
  std::vector<double> params(w.begin(), w.end());
  params.insert(params.end(), b.begin(), b.end());
  std::vector<double> grads(params.size());
  layer.bind(params.data(), grads.data());
  Tensor<double> tin;
  tin.resize(rows, 1, in, false);
  std::copy(x.begin(), x.end(), tin.re.begin());
  Tensor<double> tout;
  layer.forward(tin, tout, false, nullptr);
  return tout.re;
}

SoftmaxResult softmax_xent(std::span<const double> logits, int label) {
  if (logits.empty() || label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw std::invalid_argument("label out of range");
  }
  SoftmaxResult r;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  r.probs.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) s += (r.probs[i] = std::exp(logits[i] - mx));
  for (double& p : r.probs) p /= s;
  r.loss = std::log(s) + mx - logits[static_cast<std::size_t>(label)];
  return r;
}

std::vector<double> dropout_forward(std::span<const double> x, double p, Rng& rng, bool training) {
  DropoutLayer<double> layer(LayerSpec::dropout(p));
  Tensor<double> tin;
  tin.resize(1, 1, static_cast<int>(x.size()), false);
  std::copy(x.begin(), x.end(), tin.re.begin());
  Tensor<double> tout;
  layer.forward(tin, tout, training, &rng);
  return tout.re;
}

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state, const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw std::invalid_argument("parameter/gradient size mismatch");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), T(0));
    state.v.assign(params.size(), T(0));
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T lr = static_cast<T>(cfg.learning_rate);
  const T inv_c1 = static_cast<T>(1.0 / c1), inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(cfg.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    T& m = state.m[i];
    T& v = state.v[i];
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g * g;
    params[i] -= lr * (m * inv_c1) / (std::sqrt(v * inv_c2) + eps);
  }
}

template void adam_step<float>(std::span<float>, std::span<const float>, AdamState<float>&, const AdamConfig&);
template void adam_step<double>(std::span<double>, std::span<const double>, AdamState<double>&, const AdamConfig&);

std::vector<cdouble> init_glorot_complex(std::size_t count, int fan_in, int fan_out, Rng& rng) {
  if (fan_in + fan_out <= 0) throw std::invalid_argument("fan sizes must be positive");
  const double sigma = 1.0 / std::sqrt(static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<cdouble> out(count);
  for (cdouble& w : out) {
    const double u = std::max(unit(rng), std::numeric_limits<double>::min());
    const double mag = sigma * std::sqrt(-2.0 * std::log(u));
    const double phase = kPi * (2.0 * unit(rng) - 1.0);
    w = std::polar(mag, phase);
  }
  return out;
}

}  // namespace rfp::nn
