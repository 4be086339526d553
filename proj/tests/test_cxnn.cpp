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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rfp/cxnn.hpp"
#include "rfp/signal.hpp"
#include "test_util.hpp"

namespace rfp::nn {
namespace {

TEST(Spec, WifiComplexParameterCounts) {
  const auto counts = count_parameters_per_layer(wifi_complex());
  const std::vector<std::int64_t> expect = {40200, 100, 200200, 100, 0, 10100, 10100, 0, 1919, 0};
  EXPECT_EQ(counts, expect);
  EXPECT_EQ(count_parameters(wifi_complex()), 262719);
  // The activation choice changes only the learned ModReLU thresholds.
  EXPECT_EQ(count_parameters(wifi_complex(19, Activation::kCReLU)), 262719 - 200);
}

TEST(Spec, AdsbParameterCounts) {
  const std::vector<std::int64_t> expect = {8000, 100, 100000, 100, 0, 0, 10100, 10100, 0};
  EXPECT_EQ(count_parameters_per_layer(adsb_complex()), expect);
  EXPECT_EQ(count_parameters(adsb_complex()), 128400);
  EXPECT_EQ(count_parameters(adsb_real(1.0)), 78400);
  EXPECT_EQ(count_parameters(adsb_real(1.4)), 133680);
  EXPECT_EQ(count_parameters(adsb_real(2.0)), 246600);
}

TEST(Spec, WifiShapes) {
  const auto shapes = propagate_shapes(wifi_complex());
  const std::vector<Shape> expect = {
      {3200, 1, true}, {31, 100, true},  {31, 100, true},  {22, 100, true}, {22, 100, true}, {22, 100, false},
      {22, 100, false}, {22, 100, false}, {0, 100, false}, {0, 19, false},  {0, 19, false},
  };
  ASSERT_EQ(shapes.size(), expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(shapes[i], expect[i]) << i;
  EXPECT_EQ(num_classes(wifi_complex()), 19);
}

TEST(Spec, RejectsInconsistentLayers) {
  NetworkSpec s = reduced_complex();
  s.layers[2].in_ch = 7;
  EXPECT_THROW(propagate_shapes(s), std::invalid_argument);
  NetworkSpec t = reduced_complex();
  t.input_len = 4;
  EXPECT_THROW(propagate_shapes(t), std::invalid_argument);
}

TEST(Spec, JsonRoundTrip) {
  for (const NetworkSpec& s : {wifi_complex(), adsb_complex(), wifi_real(1.4, 19, 0.3), reduced_complex()}) {
    const NetworkSpec back = spec_from_json(spec_to_json(s));
    EXPECT_EQ(spec_to_json(back), spec_to_json(s));
    EXPECT_EQ(count_parameters(back), count_parameters(s));
  }
}

TEST(ComplexConv, EqualsStructuredRealConvolution) {
  Rng rng(21);
  std::uniform_int_distribution<int> ui(1, 6), uk(1, 9), us(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const int in_ch = ui(rng), out_ch = ui(rng), k = uk(rng), stride = us(rng);
    const int time = k + std::uniform_int_distribution<int>(0, 30)(rng);
    const auto x = test::random_complex(static_cast<std::size_t>(time * in_ch), rng);
    const auto w = test::random_complex(static_cast<std::size_t>(k * in_ch * out_ch), rng);
    const auto b = trial % 2 ? test::random_complex(static_cast<std::size_t>(out_ch), rng) : std::vector<cdouble>{};
    const auto got = complex_conv1d_forward<double>(x, time, in_ch, w, k, out_ch, b, stride);
    const auto expect = test::structured_real_conv(x, time, in_ch, w, k, out_ch, b, stride);
    ASSERT_EQ(got.size(), expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_LT(std::abs(got[i] - expect[i]), 1e-12) << trial;
  }
}

TEST(ComplexConv, ShapeErrors) {
  std::vector<cdouble> x(10), w(4);
  EXPECT_THROW(complex_conv1d_forward<double>(x, 10, 1, w, 20, 1, {}, 1), std::invalid_argument);
  EXPECT_THROW(complex_conv1d_forward<double>(x, 10, 1, w, 3, 1, {}, 1), std::invalid_argument);
}

TEST(Activations, ModReluPhaseEquivariantCReluNot) {
  Rng rng(22);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> ua(-kPi, kPi), ub(-0.5, 1.5);
  int crelu_violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const cdouble x(g(rng), g(rng));
    const double b = ub(rng), a = ua(rng);
    const cdouble rot = std::polar(1.0, a);
    ASSERT_LT(std::abs(modrelu(rot * x, b) - rot * modrelu(x, b)), 1e-12);
    if (std::abs(crelu(rot * x) - rot * crelu(x)) > 1e-6) ++crelu_violations;
  }
  EXPECT_GT(crelu_violations, 5000);
}

TEST(Activations, ModReluValues) {
  EXPECT_LT(std::abs(modrelu(cdouble(3.0, 4.0), 1.0) - cdouble(2.4, 3.2)), 1e-15);
  EXPECT_EQ(modrelu(cdouble(0.3, 0.4), 1.0), cdouble(0.0, 0.0));
  EXPECT_EQ(modrelu(cdouble(0.6, 0.8), 1.0), cdouble(0.0, 0.0));
  EXPECT_EQ(modrelu(cdouble(0.0, 0.0), -0.5), cdouble(0.5, 0.0));
  EXPECT_EQ(crelu(cdouble(-1.0, 2.0)), cdouble(0.0, 2.0));
  EXPECT_EQ(abs_squared(cdouble(3.0, -4.0)), 25.0);
}

TEST(Ops, SoftmaxXentAndAverage) {
  const std::vector<double> z = {1.0, 2.0, 3.0};
  const SoftmaxResult r = softmax_xent(z, 2);
  const double s = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(r.probs[0], std::exp(1.0) / s, 1e-15);
  EXPECT_NEAR(r.loss, -std::log(std::exp(3.0) / s), 1e-14);
  const std::vector<double> big = {1000.0, 0.0};
  EXPECT_TRUE(std::isfinite(softmax_xent(big, 1).loss));
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  EXPECT_EQ(temporal_average(x, 3, 2), (std::vector<double>{3.0, 4.0}));
}

TEST(Ops, DenseAndDropout) {
  const std::vector<double> x = {1.0, -2.0};
  const std::vector<double> w = {1.0, 2.0, 3.0, 4.0};  // [in, out]
  const std::vector<double> b = {0.5, -20.0};
  EXPECT_EQ(real_dense_forward(x, 1, 2, w, b, 2, false), (std::vector<double>{1 - 6 + 0.5, 2 - 8 - 20.0}));
  EXPECT_EQ(real_dense_forward(x, 1, 2, w, b, 2, true), (std::vector<double>{0.0, 0.0}));
  Rng rng(23);
  std::vector<double> ones(100000, 1.0);
  const auto d = dropout_forward(ones, 0.3, rng, true);
  double mean = 0.0;
  int zeros = 0;
  for (double v : d) {
    mean += v;
    zeros += v == 0.0;
  }
  EXPECT_NEAR(mean / 1e5, 1.0, 0.01);
  EXPECT_NEAR(zeros / 1e5, 0.3, 0.01);
  EXPECT_EQ(dropout_forward(ones, 0.3, rng, false), ones);
}

TEST(Init, ComplexGlorotStatistics) {
  Rng rng(24);
  const int fi = 200, fo = 100;
  const auto w = init_glorot_complex(200000, fi, fo, rng);
  double p = 0.0;
  cdouble unit_mean = 0.0;
  int above_median = 0;
  const double sigma = 1.0 / std::sqrt(fi + fo);
  const double median = sigma * std::sqrt(2.0 * std::log(2.0));  // Rayleigh median
  for (const cdouble& v : w) {
    p += std::norm(v);
    unit_mean += v / std::abs(v);
    above_median += std::abs(v) > median;
  }
  EXPECT_NEAR(p / w.size() * (fi + fo) / 2.0, 1.0, 0.01);
  EXPECT_LT(std::abs(unit_mean) / w.size(), 0.01);
  EXPECT_NEAR(above_median / static_cast<double>(w.size()), 0.5, 0.005);
}

TEST(Init, NetworkIsDeterministicAndBiasesZero) {
  Network<double> a(reduced_complex()), b(reduced_complex());
  a.init_glorot(5);
  b.init_glorot(5);
  EXPECT_EQ(a.params(), b.params());
  b.init_glorot(6);
  EXPECT_NE(a.params(), b.params());
  for (const auto& blk : a.blocks()) {
    if (blk.name.find("bias") == std::string::npos) continue;
    for (std::size_t i = 0; i < blk.real_size(); ++i) EXPECT_EQ(a.params()[blk.offset + i], 0.0) << blk.name;
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> p = {1.0, -2.0, 0.5}, g = {0.3, -4.0, 0.0};
  AdamState<double> st;
  AdamConfig cfg{.learning_rate = 0.01};
  adam_step<double>(p, g, st, cfg);
  EXPECT_NEAR(p[0], 1.0 - 0.01 * 0.3 / (0.3 + 1e-8), 1e-12);
  EXPECT_NEAR(p[1], -2.0 + 0.01 * 4.0 / (4.0 + 1e-8), 1e-12);
  EXPECT_EQ(p[2], 0.5);
  // Second step with the same gradient: bias-corrected moments equal g, g^2.
  adam_step<double>(p, g, st, cfg);
  EXPECT_NEAR(p[0], 1.0 - 2 * 0.01 * 0.3 / (0.3 + 1e-8), 1e-12);
}

// Every parameter gradient against central differences of the full loss.
TEST(Gradients, ReducedNetworkMatchesFiniteDifferences) {
  Network<double> net(reduced_complex(64, 4, 3));
  net.init_glorot(31);
  Rng rng(32);
  // Non-zero biases exercise every branch of the backward pass.
  std::uniform_real_distribution<double> ub(-0.1, 0.1);
  for (double& v : net.params()) v += ub(rng) * 0.5;
  const int batch = 5;
  const auto x = test::random_complex(static_cast<std::size_t>(64 * batch), rng);
  const std::vector<int> labels = {0, 1, 2, 1, 0};
  const double wd = 1e-3;
  const Tensor<double> in = net.make_input(std::span<const cdouble>(x), batch);

  net.zero_grads();
  net.loss_and_backward(in, labels, wd, false);
  const std::vector<double> analytic = net.grads();

  const double h = 1e-6;
  int checked = 0;
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    const double saved = net.params()[i];
    net.params()[i] = saved + h;
    net.zero_grads();
    const double lp = net.loss_and_backward(in, labels, wd, false).first;
    net.params()[i] = saved - h;
    net.zero_grads();
    const double lm = net.loss_and_backward(in, labels, wd, false).first;
    net.params()[i] = saved;
    const double fd = (lp - lm) / (2 * h);
    const double scale = std::max(std::abs(fd), std::abs(analytic[i]));
    ASSERT_LE(std::abs(fd - analytic[i]), 1e-4 * scale + 1e-9) << "param " << i << " fd=" << fd << " an=" << analytic[i];
    ++checked;
  }
  EXPECT_EQ(checked, static_cast<int>(count_parameters(net.spec())));
}

TEST(Gradients, InputGradientMatchesFiniteDifferences) {
  Network<double> net(reduced_complex(64, 4, 3));
  net.init_glorot(33);
  Rng rng(34);
  auto x = test::random_complex(64, rng);
  const std::vector<int> label = {2};
  const std::size_t end = net.spec().layers.size() - 1;  // up to the logits
  auto logit = [&](const std::vector<cdouble>& v) {
    return net.forward(net.make_input(std::span<const cdouble>(v), 1), false, nullptr, end).re[2];
  };
  const Tensor<double>& y = net.forward(net.make_input(std::span<const cdouble>(x), 1), false, nullptr, end);
  Tensor<double> g;
  g.resize(1, y.time, y.channels, false);
  g.re[2] = 1.0;
  net.zero_grads();
  const Tensor<double> gx = net.backward_from(g, end, true);
  const double h = 1e-6;
  for (std::size_t n = 0; n < x.size(); ++n) {
    for (int part = 0; part < 2; ++part) {
      const cdouble d = part == 0 ? cdouble(h, 0.0) : cdouble(0.0, h);
      auto xp = x, xm = x;
      xp[n] += d;
      xm[n] -= d;
      const double fd = (logit(xp) - logit(xm)) / (2 * h);
      const double an = part == 0 ? gx.cx[n].real() : gx.cx[n].imag();
      ASSERT_LE(std::abs(fd - an), 1e-4 * std::max(std::abs(fd), std::abs(an)) + 1e-9) << n << ":" << part;
    }
  }
}

PacketSet tone_dataset(int n_per_class, Rng& rng) {
  PacketSet s;
  s.packet_length = 64;
  std::normal_distribution<double> g(0.0, 0.3);
  std::uniform_real_distribution<double> ph(-kPi, kPi);
  for (int i = 0; i < n_per_class * 3; ++i) {
    const int label = i % 3;
    const double f = 0.05 + 0.1 * label;
    const double p0 = ph(rng);
    std::vector<cdouble> x(64);
    for (std::size_t n = 0; n < 64; ++n) x[n] = std::polar(1.0, 2 * kPi * f * n + p0) + cdouble(g(rng), g(rng));
    s.push_back(std::span<const cdouble>(x), label);
  }
  return s;
}

TEST(Train, LearnsToySeparableProblem) {
  Rng rng(40);
  const PacketSet tr = tone_dataset(60, rng), te = tone_dataset(30, rng);
  Network<float> net(reduced_complex(64, 8, 3));
  net.init_glorot(41);
  TrainConfig cfg{.epochs = 60, .batch_size = 20, .learning_rate = 1e-2, .weight_decay = 0.0, .seed = 42};
  int callbacks = 0;
  const TrainHistory h = train(net, tr, &te, cfg, [&](const EpochStats&) { ++callbacks; });
  EXPECT_EQ(callbacks, 60);
  ASSERT_EQ(h.epochs.size(), 60u);
  EXPECT_LT(h.epochs.back().train_loss, h.epochs.front().train_loss);
  EXPECT_GE(h.epochs.back().val_accuracy, 0.95);
}

TEST(Train, DeterministicGivenSeed) {
  Rng rng(43);
  const PacketSet tr = tone_dataset(10, rng);
  TrainConfig cfg{.epochs = 3, .batch_size = 7, .seed = 44};
  Network<float> a(reduced_complex()), b(reduced_complex());
  a.init_glorot(1);
  b.init_glorot(1);
  train(a, tr, nullptr, cfg);
  train(b, tr, nullptr, cfg);
  EXPECT_EQ(a.params(), b.params());
  EXPECT_THROW(train(a, tr, nullptr, TrainConfig{.batch_size = 0}), std::invalid_argument);
}

TEST(Visualize, RecoversPlantedFilter) {
  Network<double> net(reduced_complex(64, 4, 3));
  net.init_glorot(50);
  Rng rng(51);
  const auto planted = test::random_complex(8, rng);
  const auto& blk = net.blocks()[0];
  ASSERT_TRUE(blk.is_complex);
  auto* w = reinterpret_cast<cdouble*>(net.params().data() + blk.offset);
  const int out_ch = 4, target = 2;
  for (int k = 0; k < 8; ++k) w[k * out_ch + target] = planted[static_cast<std::size_t>(k)];
  std::vector<double> trace;
  const auto x = visualize_filter(net, 0, target, 200, 52, &trace);
  ASSERT_EQ(x.size(), 8u);
  EXPECT_NEAR(mean_power(x), 1.0, 1e-9);
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i], trace[i - 1] - 1e-12);
  // |<x, conj(w)>| is maximized by x proportional to conj(w).
  cdouble dot = 0.0;
  double nw = 0.0;
  for (std::size_t k = 0; k < 8; ++k) {
    dot += x[k] * planted[k];
    nw += std::norm(planted[k]);
  }
  EXPECT_GT(std::abs(dot) / std::sqrt(nw * 8.0), 0.99);
  EXPECT_THROW(visualize_filter(net, 1, 0, 1, 0), std::invalid_argument);
  EXPECT_THROW(visualize_filter(net, 0, 9, 1, 0), std::invalid_argument);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  const auto dir = std::filesystem::temp_directory_path() / "rfp_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "net.bin").string();
  Network<float> net(wifi_real(1.0, 5, 0.2, 1400));
  net.init_glorot(60);
  save_checkpoint(path, net, {.seed = 60, .epoch = 7, .extra_json = R"({"note":"x"})"});
  CheckpointInfo info;
  const Network<float> back = load_checkpoint(path, &info);
  EXPECT_EQ(back.params(), net.params());
  EXPECT_EQ(spec_to_json(back.spec()), spec_to_json(net.spec()));
  EXPECT_EQ(info.seed, 60u);
  EXPECT_EQ(info.epoch, 7);
  EXPECT_NE(info.extra_json.find("note"), std::string::npos);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(load_checkpoint(path), FormatError);
  {
    std::ofstream f(path, std::ios::app | std::ios::binary);
    f << "trailing";
  }
  EXPECT_THROW(load_checkpoint(path), FormatError);
  EXPECT_THROW(load_checkpoint((dir / "missing.bin").string()), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace rfp::nn
