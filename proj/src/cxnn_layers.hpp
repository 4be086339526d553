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

// Layer implementations backing rfp::nn::Network. Private to the library.

#ifndef RFP_SRC_CXNN_LAYERS_HPP_
#define RFP_SRC_CXNN_LAYERS_HPP_

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>

#include "rfp/cxnn.hpp"

namespace rfp::nn {

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MatMap = Eigen::Map<RowMat<S>>;
template <typename S>
using ConstMatMap = Eigen::Map<const RowMat<S>>;
template <typename S>
using RowVecMap = Eigen::Map<Eigen::Matrix<S, 1, Eigen::Dynamic>>;
template <typename S>
using ConstRowVecMap = Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>>;

template <typename T>
class Layer {
 public:
  explicit Layer(const LayerSpec& spec) : spec_(spec) {}
  virtual ~Layer() = default;

  // Number of real parameter components.
  virtual std::size_t num_params() const { return 0; }
  virtual void describe(std::vector<ParamBlock<T>>& /*out*/, std::size_t /*offset*/) const {}
  virtual void init(Rng& /*rng*/) {}
  virtual void forward(const Tensor<T>& in, Tensor<T>& out, bool training, Rng* rng) = 0;
  // grad_in is null when the caller does not need the input gradient.
  virtual void backward(const Tensor<T>& in, const Tensor<T>& out, const Tensor<T>& grad_out,
                        Tensor<T>* grad_in) = 0;

  void bind(T* params, T* grads) {
    p_ = params;
    g_ = grads;
  }
  const LayerSpec& spec() const { return spec_; }

 protected:
  LayerSpec spec_;
  T* p_ = nullptr;
  T* g_ = nullptr;
};

// Shared im2col machinery for real and complex convolutions. S is the sample
// type (T or std::complex<T>).
template <typename T, typename S>
class ConvCore : public Layer<T> {
 public:
  using Layer<T>::Layer;

 protected:
  static constexpr bool kComplex = !std::is_same_v<S, T>;

  std::size_t weight_count() const {
    return static_cast<std::size_t>(this->spec_.kernel_len) * this->spec_.in_ch * this->spec_.out_ch;
  }
  S* weights() { return reinterpret_cast<S*>(this->p_); }
  S* weight_grads() { return reinterpret_cast<S*>(this->g_); }
  S* bias() { return weights() + weight_count(); }
  S* bias_grads() { return weight_grads() + weight_count(); }

  static std::vector<S>& data(Tensor<T>& t) {
    if constexpr (kComplex) {
      return t.cx;
    } else {
      return t.re;
    }
  }
  static const std::vector<S>& data(const Tensor<T>& t) {
    if constexpr (kComplex) {
      return t.cx;
    } else {
      return t.re;
    }
  }

  void conv_forward(const Tensor<T>& in, Tensor<T>& out) {
    const auto& s = this->spec_;
    const int b_n = in.batch, t_in = in.time, c_in = s.in_ch;
    const int t_out = (t_in - s.kernel_len) / s.stride + 1;
    const int cols = s.kernel_len * c_in;
    out.resize(b_n, t_out, s.out_ch, kComplex);
    col_.resize(static_cast<std::size_t>(b_n) * t_out * cols);
    const std::vector<S>& x = data(in);
    for (int b = 0; b < b_n; ++b) {
      for (int t = 0; t < t_out; ++t) {
        const std::size_t src = (static_cast<std::size_t>(b) * t_in + static_cast<std::size_t>(t) * s.stride) * c_in;
        const std::size_t dst = (static_cast<std::size_t>(b) * t_out + t) * cols;
        std::copy_n(x.data() + src, cols, col_.data() + dst);
      }
    }
    ConstMatMap<S> xc(col_.data(), static_cast<Eigen::Index>(b_n) * t_out, cols);
    ConstMatMap<S> w(weights(), cols, s.out_ch);
    MatMap<S> y(data(out).data(), static_cast<Eigen::Index>(b_n) * t_out, s.out_ch);
    y.noalias() = xc * w;
    if (s.has_bias) y.rowwise() += ConstRowVecMap<S>(bias(), s.out_ch);
  }

  void conv_backward(const Tensor<T>& in, const S* grad_out, Tensor<T>* grad_in) {
    const auto& s = this->spec_;
    const int b_n = in.batch, t_in = in.time, c_in = s.in_ch;
    const int t_out = (t_in - s.kernel_len) / s.stride + 1;
    const int cols = s.kernel_len * c_in;
    const Eigen::Index rows = static_cast<Eigen::Index>(b_n) * t_out;
    ConstMatMap<S> xc(col_.data(), rows, cols);
    ConstMatMap<S> g(grad_out, rows, s.out_ch);
    MatMap<S> gw(weight_grads(), cols, s.out_ch);
    gw.noalias() += xc.adjoint() * g;
    if (s.has_bias) RowVecMap<S>(bias_grads(), s.out_ch) += g.colwise().sum();
    if (grad_in == nullptr) return;

    gcol_.resize(col_.size());
    MatMap<S> gc(gcol_.data(), rows, cols);
    ConstMatMap<S> w(weights(), cols, s.out_ch);
    gc.noalias() = g * w.adjoint();
    grad_in->resize(b_n, t_in, c_in, kComplex);
    std::vector<S>& gx = data(*grad_in);
    std::fill(gx.begin(), gx.end(), S(0));
    for (int b = 0; b < b_n; ++b) {
      for (int t = 0; t < t_out; ++t) {
        S* dst = gx.data() + (static_cast<std::size_t>(b) * t_in + static_cast<std::size_t>(t) * s.stride) * c_in;
        const S* src = gcol_.data() + (static_cast<std::size_t>(b) * t_out + t) * cols;
        for (int j = 0; j < cols; ++j) dst[j] += src[j];
      }
    }
  }

  std::vector<S> col_;
  std::vector<S> gcol_;
};

template <typename T>
class ComplexConvLayer : public ConvCore<T, std::complex<T>> {
 public:
  using ConvCore<T, std::complex<T>>::ConvCore;

  std::size_t num_params() const override {
    return 2 * (this->weight_count() + (this->spec_.has_bias ? this->spec_.out_ch : 0));
  }

  void describe(std::vector<ParamBlock<T>>& out, std::size_t offset) const override {
    out.push_back({"complex_conv.weight", offset, this->weight_count(), true});
    if (this->spec_.has_bias) {
      out.push_back({"complex_conv.bias", offset + 2 * this->weight_count(),
                     static_cast<std::size_t>(this->spec_.out_ch), true});
    }
  }

  void init(Rng& rng) override {
    const auto& s = this->spec_;
    const auto w = init_glorot_complex(this->weight_count(), s.kernel_len * s.in_ch, s.kernel_len * s.out_ch, rng);
    std::complex<T>* dst = this->weights();
    for (std::size_t i = 0; i < w.size(); ++i) dst[i] = std::complex<T>(w[i]);
    if (s.has_bias) std::fill_n(this->bias(), s.out_ch, std::complex<T>(0));
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, bool, Rng*) override { this->conv_forward(in, out); }

  void backward(const Tensor<T>& in, const Tensor<T>&, const Tensor<T>& grad_out, Tensor<T>* grad_in) override {
    this->conv_backward(in, grad_out.cx.data(), grad_in);
  }
};

template <typename T>
class RealConvLayer : public ConvCore<T, T> {
 public:
  using ConvCore<T, T>::ConvCore;

  std::size_t num_params() const override {
    return this->weight_count() + (this->spec_.has_bias ? this->spec_.out_ch : 0);
  }

  void describe(std::vector<ParamBlock<T>>& out, std::size_t offset) const override {
    out.push_back({"real_conv.weight", offset, this->weight_count(), false});
    if (this->spec_.has_bias) {
      out.push_back({"real_conv.bias", offset + this->weight_count(), static_cast<std::size_t>(this->spec_.out_ch),
                     false});
    }
  }

  void init(Rng& rng) override {
    const auto& s = this->spec_;
    const double limit = std::sqrt(6.0 / (s.kernel_len * s.in_ch + s.kernel_len * s.out_ch));
    std::uniform_real_distribution<double> u(-limit, limit);
    T* w = this->weights();
    for (std::size_t i = 0; i < this->weight_count(); ++i) w[i] = static_cast<T>(u(rng));
    if (s.has_bias) std::fill_n(this->bias(), s.out_ch, T(0));
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, bool, Rng*) override {
    this->conv_forward(in, out);
    if (this->spec_.relu) {
      for (T& v : out.re) v = std::max(v, T(0));
    }
  }

  void backward(const Tensor<T>& in, const Tensor<T>& out, const Tensor<T>& grad_out, Tensor<T>* grad_in) override {
    if (!this->spec_.relu) {
      this->conv_backward(in, grad_out.re.data(), grad_in);
      return;
    }
    masked_.resize(grad_out.re.size());
    for (std::size_t i = 0; i < masked_.size(); ++i) masked_[i] = out.re[i] > T(0) ? grad_out.re[i] : T(0);
    this->conv_backward(in, masked_.data(), grad_in);
  }

 private:
  std::vector<T> masked_;
};

template <typename T>
class ModReLULayer : public Layer<T> {
 public:
  using Layer<T>::Layer;

  std::size_t num_params() const override { return static_cast<std::size_t>(this->spec_.in_ch); }
  void describe(std::vector<ParamBlock<T>>& out, std::size_t offset) const override {
    out.push_back({"modrelu.bias", offset, num_params(), false});
  }
  void init(Rng&) override { std::fill_n(this->p_, num_params(), T(0)); }

  void forward(const Tensor<T>& in, Tensor<T>& out, bool, Rng*) override {
    out.resize(in.batch, in.time, in.channels, true);
    const int c_n = in.channels;
    const std::size_t rows = in.rows();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::complex<T>* x = in.cx.data() + r * c_n;
      std::complex<T>* y = out.cx.data() + r * c_n;
      for (int c = 0; c < c_n; ++c) y[c] = modrelu(x[c], this->p_[c]);
    }
  }

  void backward(const Tensor<T>& in, const Tensor<T>&, const Tensor<T>& grad_out, Tensor<T>* grad_in) override {
    const int c_n = in.channels;
    const std::size_t rows = in.rows();
    if (grad_in != nullptr) grad_in->resize(in.batch, in.time, c_n, true);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::complex<T>* x = in.cx.data() + r * c_n;
      const std::complex<T>* gy = grad_out.cx.data() + r * c_n;
      std::complex<T>* gx = grad_in != nullptr ? grad_in->cx.data() + r * c_n : nullptr;
      for (int c = 0; c < c_n; ++c) {
        const T b = this->p_[c];
        const T mag = std::abs(x[c]);
        std::complex<T> g(0);
        if (mag > b) {
          if (mag > T(0)) {
            const std::complex<T> u = x[c] / mag;
            // y = x (1 - b/|x|)
            g = (T(1) - b / mag) * gy[c] + (b / (mag * mag * mag)) * std::real(std::conj(gy[c]) * x[c]) * x[c];
            this->g_[c] -= std::real(std::conj(gy[c]) * u);
          } else {
            this->g_[c] -= gy[c].real();
          }
        }
        if (gx != nullptr) gx[c] = g;
      }
    }
  }
};

template <typename T>
class CReLULayer : public Layer<T> {
 public:
  using Layer<T>::Layer;

  void forward(const Tensor<T>& in, Tensor<T>& out, bool, Rng*) override {
    out.resize(in.batch, in.time, in.channels, true);
    for (std::size_t i = 0; i < in.cx.size(); ++i) out.cx[i] = crelu(in.cx[i]);
  }

  void backward(const Tensor<T>& in, const Tensor<T>&, const Tensor<T>& grad_out, Tensor<T>* grad_in) override {
    if (grad_in == nullptr) return;
    grad_in->resize(in.batch, in.time, in.channels, true);
    for (std::size_t i = 0; i < in.cx.size(); ++i) {
      const auto& x = in.cx[i];
      const auto& g = grad_out.cx[i];
      grad_in->cx[i] = {x.real() > T(0) ? g.real() : T(0), x.imag() > T(0) ? g.imag() : T(0)};
    }
  }
};

template <typename T>
class AbsSquaredLayer : public Layer<T> {
 public:
  using Layer<T>::Layer;

  void forward(const Tensor<T>& in, Tensor<T>& out, bool, Rng*) override {
    out.resize(in.batch, in.time, in.channels, false);
    for (std::size_t i = 0; i < in.cx.size(); ++i) out.re[i] = std::norm(in.cx[i]);
  }

  void backward(const Tensor<T>& in, const Tensor<T>&, const Tensor<T>& grad_out, Tensor<T>* grad_in) override {
    if (grad_in == nullptr) return;
    grad_in->resize(in.batch, in.time, in.channels, true);
    for (std::size_t i = 0; i < in.cx.size(); ++i) grad_in->cx[i] = (T(2) * grad_out.re[i]) * in.cx[i];
  }
};

// Fully connected layer applied to every row (time step) of its input.
template <typename T>
class DenseLayer : public Layer<T> {
 public:
  using Layer<T>::Layer;

  std::size_t num_params() const override {
    return static_cast<std::size_t>(this->spec_.in_ch) * this->spec_.out_ch + this->spec_.out_ch;
  }
  void describe(std::vector<ParamBlock<T>>& out, std::size_t offset) const override {
    const std::size_t w = static_cast<std::size_t>(this->spec_.in_ch) * this->spec_.out_ch;
    out.push_back({"dense.weight", offset, w, false});
    out.push_back({"dense.bias", offset + w, static_cast<std::size_t>(this->spec_.out_ch), false});
  }

  void init(Rng& rng) override {
    const auto& s = this->spec_;
    const double limit = std::sqrt(6.0 / (s.in_ch + s.out_ch));
    std::uniform_real_distribution<double> u(-limit, limit);
    const std::size_t w = static_cast<std::size_t>(s.in_ch) * s.out_ch;
    for (std::size_t i = 0; i < w; ++i) this->p_[i] = static_cast<T>(u(rng));
    std::fill_n(this->p_ + w, s.out_ch, T(0));
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, bool, Rng*) override {
    const auto& s = this->spec_;
    out.resize(in.batch, in.time, s.out_ch, false);
    const auto rows = static_cast<Eigen::Index>(in.rows());
    ConstMatMap<T> x(in.re.data(), rows, s.in_ch);
    ConstMatMap<T> w(this->p_, s.in_ch, s.out_ch);
    MatMap<T> y(out.re.data(), rows, s.out_ch);
    y.noalias() = x * w;
    y.rowwise() += ConstRowVecMap<T>(this->p_ + static_cast<std::size_t>(s.in_ch) * s.out_ch, s.out_ch);
    if (s.relu) y = y.cwiseMax(T(0));
  }

  void backward(const Tensor<T>& in, const Tensor<T>& out, const Tensor<T>& grad_out, Tensor<T>* grad_in) override {
    const auto& s = this->spec_;
    const auto rows = static_cast<Eigen::Index>(in.rows());
    masked_.assign(grad_out.re.begin(), grad_out.re.end());
    if (s.relu) {
      for (std::size_t i = 0; i < masked_.size(); ++i) {
        if (!(out.re[i] > T(0))) masked_[i] = T(0);
      }
    }
    ConstMatMap<T> x(in.re.data(), rows, s.in_ch);
    ConstMatMap<T> g(masked_.data(), rows, s.out_ch);
    const std::size_t wn = static_cast<std::size_t>(s.in_ch) * s.out_ch;
    MatMap<T>(this->g_, s.in_ch, s.out_ch).noalias() += x.transpose() * g;
    RowVecMap<T>(this->g_ + wn, s.out_ch) += g.colwise().sum();
    if (grad_in == nullptr) return;
    grad_in->resize(in.batch, in.time, s.in_ch, false);
    ConstMatMap<T> w(this->p_, s.in_ch, s.out_ch);
    MatMap<T>(grad_in->re.data(), rows, s.in_ch).noalias() = g * w.transpose();
  }

 private:
  std::vector<T> masked_;
};

template <typename T>
class TemporalAverageLayer : public Layer<T> {
 public:
  using Layer<T>::Layer;

  void forward(const Tensor<T>& in, Tensor<T>& out, bool, Rng*) override {
    out.resize(in.batch, 1, in.channels, false);
    std::fill(out.re.begin(), out.re.end(), T(0));
    const T scale = T(1) / static_cast<T>(in.time);
    for (int b = 0; b < in.batch; ++b) {
      T* y = out.re.data() + static_cast<std::size_t>(b) * in.channels;
      for (int t = 0; t < in.time; ++t) {
        const T* x = in.re.data() + (static_cast<std::size_t>(b) * in.time + t) * in.channels;
        for (int c = 0; c < in.channels; ++c) y[c] += x[c];
      }
      for (int c = 0; c < in.channels; ++c) y[c] *= scale;
    }
  }

  void backward(const Tensor<T>& in, const Tensor<T>&, const Tensor<T>& grad_out, Tensor<T>* grad_in) override {
    if (grad_in == nullptr) return;
    grad_in->resize(in.batch, in.time, in.channels, false);
    const T scale = T(1) / static_cast<T>(in.time);
    for (int b = 0; b < in.batch; ++b) {
      const T* g = grad_out.re.data() + static_cast<std::size_t>(b) * in.channels;
      for (int t = 0; t < in.time; ++t) {
        T* gx = grad_in->re.data() + (static_cast<std::size_t>(b) * in.time + t) * in.channels;
        for (int c = 0; c < in.channels; ++c) gx[c] = g[c] * scale;
      }
    }
  }
};

template <typename T>
class DropoutLayer : public Layer<T> {
 public:
  using Layer<T>::Layer;

  void forward(const Tensor<T>& in, Tensor<T>& out, bool training, Rng* rng) override {
    out = in;
    active_ = training && this->spec_.drop_p > 0.0;
    if (!active_) return;
    if (rng == nullptr) throw std::invalid_argument("dropout in training mode needs a random stream");
    const T keep_scale = T(1) / static_cast<T>(1.0 - this->spec_.drop_p);
    std::bernoulli_distribution drop(this->spec_.drop_p);
    mask_.resize(in.re.size());
    for (std::size_t i = 0; i < mask_.size(); ++i) {
      mask_[i] = drop(*rng) ? T(0) : keep_scale;
      out.re[i] *= mask_[i];
    }
  }

  void backward(const Tensor<T>& in, const Tensor<T>&, const Tensor<T>& grad_out, Tensor<T>* grad_in) override {
    if (grad_in == nullptr) return;
    *grad_in = grad_out;
    grad_in->resize(in.batch, in.time, in.channels, false);
    if (!active_) return;
    for (std::size_t i = 0; i < mask_.size(); ++i) grad_in->re[i] *= mask_[i];
  }

 private:
  bool active_ = false;
  std::vector<T> mask_;
};

template <typename T>
class SoftmaxLayer : public Layer<T> {
 public:
  using Layer<T>::Layer;

  void forward(const Tensor<T>& in, Tensor<T>& out, bool, Rng*) override {
    out.resize(in.batch, 1, in.channels, false);
    for (int b = 0; b < in.batch; ++b) {
      const T* x = in.re.data() + static_cast<std::size_t>(b) * in.channels;
      T* y = out.re.data() + static_cast<std::size_t>(b) * in.channels;
      const T mx = *std::max_element(x, x + in.channels);
      T sum = 0;
      for (int c = 0; c < in.channels; ++c) sum += (y[c] = std::exp(x[c] - mx));
      for (int c = 0; c < in.channels; ++c) y[c] /= sum;
    }
  }

  void backward(const Tensor<T>& in, const Tensor<T>& out, const Tensor<T>& grad_out, Tensor<T>* grad_in) override {
    if (grad_in == nullptr) return;
    grad_in->resize(in.batch, 1, in.channels, false);
    for (int b = 0; b < in.batch; ++b) {
      const std::size_t o = static_cast<std::size_t>(b) * in.channels;
      T dot = 0;
      for (int c = 0; c < in.channels; ++c) dot += grad_out.re[o + c] * out.re[o + c];
      for (int c = 0; c < in.channels; ++c) grad_in->re[o + c] = out.re[o + c] * (grad_out.re[o + c] - dot);
    }
  }
};

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::kComplexConv:
      return std::make_unique<ComplexConvLayer<T>>(spec);
    case LayerKind::kRealConv:
      return std::make_unique<RealConvLayer<T>>(spec);
    case LayerKind::kModReLU:
      return std::make_unique<ModReLULayer<T>>(spec);
    case LayerKind::kCReLU:
      return std::make_unique<CReLULayer<T>>(spec);
    case LayerKind::kAbsSquared:
      return std::make_unique<AbsSquaredLayer<T>>(spec);
    case LayerKind::kRealDensePerStep:
    case LayerKind::kRealDense:
      return std::make_unique<DenseLayer<T>>(spec);
    case LayerKind::kTemporalAverage:
      return std::make_unique<TemporalAverageLayer<T>>(spec);
    case LayerKind::kDropout:
      return std::make_unique<DropoutLayer<T>>(spec);
    case LayerKind::kSoftmax:
      return std::make_unique<SoftmaxLayer<T>>(spec);
  }
  throw std::invalid_argument("unsupported layer kind");
}

}  // namespace rfp::nn

#endif  // RFP_SRC_CXNN_LAYERS_HPP_
