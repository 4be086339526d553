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

// Complex-valued 1-D convolutional networks trained from scratch.
//
// Tensors are [batch, time, channels] row-major. Complex parameters are kept
// as interleaved (re, im) pairs in one flat real buffer so that the optimizer
// and checkpointing see plain real components. Gradients follow the
// convention G = dL/dRe + j dL/dIm.

#ifndef RFP_CXNN_HPP_
#define RFP_CXNN_HPP_

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rfp/common.hpp"
#include "rfp/dataset.hpp"

namespace rfp::nn {

enum class LayerKind {
  kComplexConv,
  kModReLU,
  kCReLU,
  kAbsSquared,
  kRealDensePerStep,
  kTemporalAverage,
  kRealDense,
  kSoftmax,
  kRealConv,
  kDropout,
};

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::kSoftmax;
  int kernel_len = 0;
  int in_ch = 0;
  int out_ch = 0;
  int stride = 1;
  bool has_bias = false;
  bool relu = false;
  double drop_p = 0.0;

  static LayerSpec complex_conv(int kernel_len, int in_ch, int out_ch, int stride, bool has_bias);
  static LayerSpec real_conv(int kernel_len, int in_ch, int out_ch, int stride, bool relu);
  static LayerSpec modrelu(int channels);
  static LayerSpec crelu();
  static LayerSpec abs_squared();
  static LayerSpec dense_per_step(int in, int out, bool relu);
  static LayerSpec temporal_average();
  static LayerSpec dense(int in, int out, bool relu);
  static LayerSpec softmax();
  static LayerSpec dropout(double p);
};

struct NetworkSpec {
  int input_len = 0;
  // Complex channels for complex input, real channels (re/im stacked) otherwise.
  int input_channels = 1;
  bool complex_input = true;
  std::vector<LayerSpec> layers;
};

struct Shape {
  int time = 0;  // 0 for a plain feature vector
  int channels = 0;
  bool is_complex = false;

  bool operator==(const Shape&) const = default;
};

// Output shape of every layer, input first. Throws std::invalid_argument on
// a broken chain or when a complex network does not contain exactly one
// |.|^2 layer.
std::vector<Shape> propagate_shapes(const NetworkSpec& spec);
std::vector<std::int64_t> count_parameters_per_layer(const NetworkSpec& spec);
std::int64_t count_parameters(const NetworkSpec& spec);
int num_classes(const NetworkSpec& spec);

enum class Activation { kModReLU, kCReLU };

// 100 C 200x100 - 100 C 10x1 - |.|^2 - 100 D - 100 D - Avg - n_classes D.
NetworkSpec wifi_complex(int n_classes = 19, Activation act = Activation::kModReLU, int input_len = 3200);
// 100 C 40x20 - 100 C 5x1 - |.|^2 - Avg - 100 D - 100 D (convs without bias).
NetworkSpec adsb_complex(int n_classes = 100, int input_len = 320);
// Real counterparts with re/im as two input channels; conv widths scaled.
NetworkSpec wifi_real(double channel_scale, int n_classes = 19, double dropout_p = 0.0, int input_len = 3200);
NetworkSpec adsb_real(double channel_scale, int n_classes = 100, double dropout_p = 0.0, int input_len = 320);
// Reduced network used for gradient checks.
NetworkSpec reduced_complex(int input_len = 64, int channels = 4, int n_classes = 3);

template <typename T>
struct Tensor {
  int batch = 0;
  int time = 0;
  int channels = 0;
  bool is_complex = false;
  std::vector<T> re;
  std::vector<std::complex<T>> cx;

  std::size_t rows() const { return static_cast<std::size_t>(batch) * time; }
  std::size_t numel() const { return rows() * channels; }
  void resize(int b, int t, int c, bool complex_data);
};

template <typename T>
struct ParamBlock {
  std::string name;
  std::size_t offset = 0;  // into the flat real buffer
  std::size_t count = 0;   // scalar entries (complex entries count once)
  bool is_complex = false;

  std::size_t real_size() const { return is_complex ? 2 * count : count; }
};

template <typename T>
class Layer;

template <typename T>
class Network {
 public:
  explicit Network(NetworkSpec spec);
  ~Network();
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<Shape>& shapes() const { return shapes_; }
  int num_classes() const;

  // Complex layers: Glorot variant with Rayleigh magnitudes and uniform
  // phases; real layers: Glorot uniform; biases zero.
  void init_glorot(std::uint64_t seed);

  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }
  std::vector<T>& grads() { return grads_; }
  const std::vector<ParamBlock<T>>& blocks() const { return blocks_; }
  void zero_grads();

  // Builds the input tensor from complex packets (batch x input_len).
  Tensor<T> make_input(std::span<const cfloat> samples, int batch) const;
  Tensor<T> make_input(std::span<const cdouble> samples, int batch) const;

  // Runs layers [0, end_layer) and returns the final activation. Softmax is
  // applied when it is among the layers run. Activations are cached for a
  // subsequent backward pass.
  const Tensor<T>& forward(const Tensor<T>& input, bool training, Rng* dropout_rng = nullptr,
                           std::optional<std::size_t> end_layer = std::nullopt);

  // Mean cross-entropy plus weight_decay * sum(theta^2); fills grads()
  // (accumulating into whatever is there). Returns {loss, n_correct}.
  std::pair<double, int> loss_and_backward(const Tensor<T>& input, std::span<const int> labels,
                                           double weight_decay, bool training, Rng* dropout_rng = nullptr);

  // Backpropagates `grad_out` from the output of layer end_layer-1 through
  // layers [0, end_layer) after a matching forward(); returns the input
  // gradient (empty unless requested). Parameter gradients are accumulated.
  Tensor<T> backward_from(const Tensor<T>& grad_out, std::size_t end_layer, bool need_input_grad = true);

  // Softmax posteriors, row-major [n, classes].
  std::vector<double> predict_proba(std::span<const cfloat> samples, int n, int batch_size = 256);
  std::vector<double> predict_logits(std::span<const cfloat> samples, int n, int batch_size = 256);

  double weight_penalty() const;

 private:
  void build();
  std::vector<double> run_batches(std::span<const cfloat> samples, int n, int batch_size, bool logits);

  NetworkSpec spec_;
  std::vector<Shape> shapes_;
  std::vector<T> params_;
  std::vector<T> grads_;
  std::vector<ParamBlock<T>> blocks_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::vector<Tensor<T>> acts_;
  std::vector<Tensor<T>> grad_acts_;
  std::size_t cached_end_ = 0;
};

// Standalone layer operations. Shapes are row-major: x [time, in_ch],
// weights [kernel_len, in_ch, out_ch], dense weights [in, out].
template <typename T>
std::vector<std::complex<T>> complex_conv1d_forward(std::span<const std::complex<T>> x, int time, int in_ch,
                                                    std::span<const std::complex<T>> w, int kernel_len,
                                                    int out_ch, std::span<const std::complex<T>> bias, int stride);
// max(|x| - bias, 0) e^{j arg x}; arg 0 is taken as 0.
template <typename T>
std::complex<T> modrelu(std::complex<T> x, T bias) {
  const T r = std::abs(x);
  if (!(r > bias)) return {T(0), T(0)};
  if (r == T(0)) return {-bias, T(0)};
  return x * ((r - bias) / r);
}
template <typename T>
std::complex<T> crelu(std::complex<T> x) {
  return {x.real() > T(0) ? x.real() : T(0), x.imag() > T(0) ? x.imag() : T(0)};
}
template <typename T>
T abs_squared(std::complex<T> x) {
  return std::norm(x);
}
std::vector<double> temporal_average(std::span<const double> x, int time, int channels);
std::vector<double> real_dense_forward(std::span<const double> x, int rows, int in, std::span<const double> w,
                                       std::span<const double> b, int out, bool relu);
struct SoftmaxResult {
  std::vector<double> probs;
  double loss = 0.0;
};
SoftmaxResult softmax_xent(std::span<const double> logits, int label);
std::vector<double> dropout_forward(std::span<const double> x, double p, Rng& rng, bool training);

// Adam with bias correction on plain real components.
struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::int64_t step = 0;
};

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state, const AdamConfig& cfg);

// Complex Glorot draw: Rayleigh magnitude with scale 1/sqrt(fan_in+fan_out)
// and uniform phase.
std::vector<cdouble> init_glorot_complex(std::size_t count, int fan_in, int fan_out, Rng& rng);

struct TrainConfig {
  int epochs = 200;
  int batch_size = 100;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;  // NaN when no validation set
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Epoch-shuffled minibatch training with Adam and coupled L2 decay. Weights
// must already be initialized.
template <typename T>
TrainHistory train(Network<T>& net, const PacketSet& train_set, const PacketSet* val_set, const TrainConfig& cfg,
                   const EpochCallback& on_epoch = {});

// Input of the layer's receptive-field length maximizing the mean magnitude
// of one filter's output, by projected gradient ascent on the unit-power
// sphere from seeded noise. `objective_trace`, when given, receives the
// objective after each accepted step.
template <typename T>
std::vector<cdouble> visualize_filter(Network<T>& net, std::size_t layer_index, int filter_index, int steps,
                                      std::uint64_t seed, std::vector<double>* objective_trace = nullptr);

int receptive_field(const NetworkSpec& spec, std::size_t layer_index);

// Checkpoint: magic, JSON header (spec, seed, epoch), little-endian float32
// blob in layer order with real components before imaginary per block.
struct CheckpointInfo {
  std::uint64_t seed = 0;
  int epoch = 0;
  std::string extra_json = "{}";
};

void save_checkpoint(const std::string& path, const Network<float>& net, const CheckpointInfo& info);
Network<float> load_checkpoint(const std::string& path, CheckpointInfo* info = nullptr);

std::string spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const std::string& json);

}  // namespace rfp::nn

#endif  // RFP_CXNN_HPP_
