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

// Dataset generation and persistence, augmentation, test-time augmentation,
// day-based experiments and metrics.

#ifndef RFP_HARNESS_HPP_
#define RFP_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfp/confounders.hpp"
#include "rfp/cxnn.hpp"
#include "rfp/dataset.hpp"
#include "rfp/impairments.hpp"
#include "rfp/preamble.hpp"

namespace rfp::harness {

enum class Split { kTrain = 0, kVal = 1, kTest = 2 };
std::string to_string(Split split);

struct DatasetManifest {
  int n_devices = 19;
  int train_per_device = 200;
  int val_per_device = 100;
  int test_per_device = 100;
  double snr_db = 20.0;
  int oversample_factor = 10;
  double carrier_freq_hz = 5.8e9;
  std::uint64_t master_seed = 0;
  // Filled from master_seed by generate_dataset when empty.
  std::vector<impairments::DeviceProfile> profiles;
  // Split name -> file name, filled by save_dataset.
  std::vector<std::pair<std::string, std::string>> files;

  preamble::PreambleSpec preamble_spec() const;
  int per_device(Split split) const;
};

void validate(const DatasetManifest& m);
std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);
// Hex digest over the canonical JSON of the generating fields.
std::string manifest_hash(const DatasetManifest& m);

struct Dataset {
  DatasetManifest manifest;
  PacketSet train;
  PacketSet val;
  PacketSet test;
  std::vector<std::string> warnings;

  PacketSet& split(Split s);
  const PacketSet& split(Split s) const;
};

// Clean packets: preamble, device IQ imbalance and PA, AWGN, unit power.
// Packets are ordered device-major within each split. Packet noise is keyed
// by (master_seed, device, split, index) so any subset can be regenerated
// independently.
Dataset generate_dataset(const DatasetManifest& manifest, int threads = 1);
std::vector<cdouble> generate_packet(const DatasetManifest& m, int device, Split split, int index);

// Directory layout: manifest.json plus <split>.bin and <split>.json.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

void save_packets(const PacketSet& set, const std::string& path);
PacketSet load_packets(const std::string& path);

// Augmentation --------------------------------------------------------------

enum class AugKind { kNone, kCfo, kChannel, kCfoChannel };
enum class Assignment { kRandom, kOrthogonal };
enum class TtaReduce { kSoftmaxMean, kLogitMean };

struct CfoDistribution {
  enum class Kind { kUniform, kBernoulli } kind = Kind::kUniform;
  double lo_ppm = -40.0;
  double hi_ppm = 40.0;

  double draw(Rng& rng) const;
};

struct AugmentationPolicy {
  AugKind kind = AugKind::kNone;
  // Assignment of channel draws (and of CFO draws unless cfo_assignment is set).
  Assignment assignment = Assignment::kRandom;
  std::optional<Assignment> cfo_assignment;
  CfoDistribution cfo;
  int multiplier = 1;
  TtaReduce tta_reduce = TtaReduce::kSoftmaxMean;

  bool has_cfo() const { return kind == AugKind::kCfo || kind == AugKind::kCfoChannel; }
  bool has_channel() const { return kind == AugKind::kChannel || kind == AugKind::kCfoChannel; }
  Assignment effective_cfo_assignment() const { return cfo_assignment.value_or(assignment); }
};

void validate(const AugmentationPolicy& p);
std::string to_string(AugKind k);
AugKind aug_kind_from_string(const std::string& s);
std::string to_string(Assignment a);
Assignment assignment_from_string(const std::string& s);
std::string to_string(TtaReduce r);
TtaReduce tta_reduce_from_string(const std::string& s);

// Parameters applied to one augmented copy.
struct AugDraw {
  std::optional<double> cfo_ppm;
  std::optional<confounders::ChannelRealization> channel;
};

struct AugmentedSet {
  PacketSet packets;
  std::vector<AugDraw> draws;  // parallel to packets
};

// Copy k of packet i is the k-th block of size n: output index k * n + i.
// Orthogonal assignment draws `multiplier` parameter sets once and uses set k
// for copy k of every packet. Outputs are renormalized to unit power.
AugmentedSet augment_train(const PacketSet& packets, const AugmentationPolicy& policy, std::uint64_t seed,
                           const preamble::PreambleSpec& spec);

void apply_draw(std::vector<cdouble>& x, const AugDraw& draw, const preamble::PreambleSpec& spec);

// Averages posteriors over n_tta augmented copies of each packet; n_tta = 0
// is a plain forward pass. Returns row-major [n, classes] probabilities.
std::vector<double> predict_tta(nn::Network<float>& net, const PacketSet& packets, const AugmentationPolicy& policy,
                                int n_tta, std::uint64_t seed, const preamble::PreambleSpec& spec);

// Metrics -------------------------------------------------------------------

struct Metrics {
  double accuracy = 0.0;
  std::vector<std::vector<int>> confusion;  // [true][predicted]
};

Metrics metrics(std::span<const int> predictions, std::span<const int> labels, int n_classes);
std::vector<int> argmax_rows(std::span<const double> probs, int n_classes);

// Experiments ---------------------------------------------------------------

enum class ScalePreset { kDesk, kPaper };
ScalePreset scale_from_string(const std::string& s);

struct ExperimentConfig {
  std::string name = "experiment";
  DatasetManifest dataset;
  int n_train_days = 20;
  bool same_day_test = false;  // test on a training day instead of a fresh one
  bool use_cfo = true;
  bool use_channel = true;
  std::pair<double, double> cfo_range_ppm{-40.0, 40.0};
  bool cfo_comp = false;
  bool equalize = false;
  bool residual = false;
  AugmentationPolicy augmentation;
  std::vector<int> tta_list{0};
  std::string network = "wifi_complex";  // wifi_complex | wifi_complex_crelu | wifi_real
  double real_channel_scale = 1.0;
  double dropout = 0.0;
  nn::TrainConfig train;
  bool track_validation = false;
  int n_runs = 5;
  std::uint64_t master_seed = 0;
  int threads = 1;
};

// Desk: 100 train packets per device, 50 epochs, 10 train augmentations.
// kPaper: 200 packets, 200 epochs, 20 augmentations.
void apply_scale(ExperimentConfig& cfg, ScalePreset preset);
void validate(const ExperimentConfig& cfg);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
nn::NetworkSpec network_for(const ExperimentConfig& cfg);

struct TtaResult {
  int n_tta = 0;
  std::vector<double> run_accuracies;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation across runs
  std::vector<std::vector<int>> confusion;  // summed over runs
};

struct RunRecord {
  int run = 0;
  std::uint64_t emulation_seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t augment_seed = 0;
  std::uint64_t tta_seed = 0;
  std::vector<confounders::DayRealization> train_days;
  confounders::DayRealization test_day;
  nn::TrainHistory history;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  std::vector<TtaResult> results;  // one per tta_list entry
  std::vector<std::string> warnings;

  const TtaResult& result_for(int n_tta) const;
};

// Transforms one emulated packet into the network input per the
// compensation and residual toggles; output has unit power.
void preprocess_packet(std::vector<cdouble>& x, const ExperimentConfig& cfg, const preamble::PreambleSpec& spec);

struct RunOutput {
  RunRecord record;
  std::vector<std::vector<int>> predictions;  // per tta_list entry
  std::vector<int> labels;
};

// Seeds and day realizations of one run; a pure function of (cfg, run).
RunRecord plan_run(const ExperimentConfig& cfg, int run);

// Test-split accuracy per tta_list entry for a network trained under run
// `run` of cfg (same test day and TTA seed as run_single).
std::vector<Metrics> evaluate_run(nn::Network<float>& net, const ExperimentConfig& cfg, const Dataset& data, int run);

// One seeded run: emulate days, preprocess, augment, train, evaluate.
RunOutput run_single(const ExperimentConfig& cfg, const Dataset& data, int run,
                     nn::Network<float>* trained = nullptr);

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset* data = nullptr);

std::string report_to_json(const ExperimentReport& report);
std::string confusion_to_csv(const std::vector<std::vector<int>>& confusion);
std::string history_to_csv(const std::vector<RunRecord>& runs);

struct FoldReport {
  int fold = 0;
  double accuracy = 0.0;
  std::vector<std::vector<int>> confusion;
};

struct CrossValidationReport {
  int k = 5;
  std::vector<FoldReport> folds;
  double mean = 0.0;
  double std = 0.0;
};

// Stratified k-fold over the emulated training pool (train + val packets),
// with the experiment's preprocessing and augmentation; fold i holds out
// every k-th packet of each class starting at a seeded offset permutation.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);
CrossValidationReport cross_validate(const ExperimentConfig& cfg, int k, const Dataset* data = nullptr);
std::string cv_report_to_json(const CrossValidationReport& report);

double sample_std(std::span<const double> v);

}  // namespace rfp::harness

#endif  // RFP_HARNESS_HPP_
