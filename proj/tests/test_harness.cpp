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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "rfp/dsp_comp.hpp"
#include "rfp/harness.hpp"
#include "test_util.hpp"

namespace rfp::harness {
namespace {

namespace fs = std::filesystem;

DatasetManifest tiny_manifest() {
  DatasetManifest m;
  m.n_devices = 3;
  m.train_per_device = 6;
  m.val_per_device = 2;
  m.test_per_device = 4;
  m.master_seed = 9;
  return m;
}

const Dataset& tiny_dataset() {
  static const Dataset ds = generate_dataset(tiny_manifest());
  return ds;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rfp_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool same_packets(const PacketSet& a, const PacketSet& b) {
  return a.packet_length == b.packet_length && a.labels == b.labels && a.samples == b.samples;
}

TEST(Dataset, ShapesLabelsAndPower) {
  const Dataset& ds = tiny_dataset();
  EXPECT_EQ(ds.train.size(), 18u);
  EXPECT_EQ(ds.val.size(), 6u);
  EXPECT_EQ(ds.test.size(), 12u);
  EXPECT_EQ(ds.train.packet_length, 3200u);
  EXPECT_EQ(ds.manifest.profiles.size(), 3u);
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const PacketSet& p = ds.split(s);
    std::map<int, int> counts;
    for (std::size_t i = 0; i < p.size(); ++i) {
      ++counts[p.labels[i]];
      double pw = 0.0;
      for (const cfloat& v : p.packet(i)) pw += std::norm(v);
      EXPECT_NEAR(pw / 3200.0, 1.0, 1e-5);
    }
    for (int d = 0; d < 3; ++d) EXPECT_EQ(counts[d], ds.manifest.per_device(s));
  }
}

TEST(Dataset, DeterministicAndThreadInvariant) {
  const Dataset again = generate_dataset(tiny_manifest(), 3);
  EXPECT_TRUE(same_packets(again.train, tiny_dataset().train));
  EXPECT_TRUE(same_packets(again.test, tiny_dataset().test));
  DatasetManifest other = tiny_manifest();
  other.master_seed = 10;
  EXPECT_FALSE(same_packets(generate_dataset(other).train, tiny_dataset().train));
}

TEST(Dataset, PacketsAreIndividuallyKeyed) {
  const Dataset& ds = tiny_dataset();
  const DatasetManifest& m = ds.manifest;
  for (std::size_t i = 0; i < ds.test.size(); i += 5) {
    const int dev = ds.test.labels[i];
    int index = 0;
    for (std::size_t j = 0; j < i; ++j) index += ds.test.labels[j] == dev;
    const auto x = generate_packet(m, dev, Split::kTest, index);
    for (std::size_t n = 0; n < x.size(); ++n) {
      ASSERT_EQ(ds.test.packet(i)[n], cfloat(static_cast<float>(x[n].real()), static_cast<float>(x[n].imag())));
    }
  }
}

TEST(Dataset, NoiseLevelMatchesSnr) {
  DatasetManifest m = tiny_manifest();
  m.profiles = impairments::assign_profiles(3, m.master_seed);
  const auto pre = preamble::generate_preamble(m.preamble_spec());
  const auto clean = impairments::apply_device(pre, m.profiles[1]);
  double err = 0.0, ref = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto x = generate_packet(m, 1, Split::kTrain, i);
    // Undo the output normalization before comparing.
    cdouble num = 0.0;
    double den = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      num += std::conj(x[n]) * clean.samples[n];
      den += std::norm(x[n]);
    }
    const cdouble a = num / den;
    for (std::size_t n = 0; n < x.size(); ++n) {
      err += std::norm(a * x[n] - clean.samples[n]);
      ref += std::norm(clean.samples[n]);
    }
  }
  EXPECT_NEAR(test::db(ref / err), 20.0, 0.3);
}

TEST(Dataset, SaveLoadRoundTrip) {
  const fs::path dir = scratch("roundtrip");
  save_dataset(tiny_dataset(), dir.string());
  const Dataset back = load_dataset(dir.string());
  EXPECT_TRUE(same_packets(back.train, tiny_dataset().train));
  EXPECT_TRUE(same_packets(back.val, tiny_dataset().val));
  EXPECT_TRUE(same_packets(back.test, tiny_dataset().test));
  EXPECT_TRUE(back.warnings.empty());
  EXPECT_EQ(manifest_hash(back.manifest), manifest_hash(tiny_dataset().manifest));
  fs::remove_all(dir);
}

TEST(Dataset, CorruptedMagicRejected) {
  const fs::path dir = scratch("magic");
  save_dataset(tiny_dataset(), dir.string());
  fs::path bin;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".bin") bin = e.path();
  }
  ASSERT_FALSE(bin.empty());
  {
    std::fstream f(bin, std::ios::in | std::ios::out | std::ios::binary);
    f.write("NOTMAGIC", 8);
  }
  EXPECT_THROW(load_dataset(dir.string()), FormatError);
  EXPECT_THROW(load_packets(bin.string()), FormatError);
  EXPECT_THROW(load_dataset((dir / "absent").string()), IoError);
  fs::remove_all(dir);
}

TEST(Dataset, ManifestHashMismatchWarns) {
  const fs::path dir = scratch("hash");
  save_dataset(tiny_dataset(), dir.string());
  const fs::path mf = dir / "manifest.json";
  std::ifstream in(mf);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const std::string key = "\"manifest_hash\": \"";
  const auto pos = text.find(key);
  ASSERT_NE(pos, std::string::npos);
  text[pos + key.size()] = text[pos + key.size()] == '0' ? '1' : '0';
  std::ofstream(mf) << text;
  const Dataset back = load_dataset(dir.string());
  ASSERT_FALSE(back.warnings.empty());
  EXPECT_NE(back.warnings.front().find("hash"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Manifest, JsonRoundTripAndValidation) {
  DatasetManifest m = tiny_manifest();
  m.profiles = impairments::assign_profiles(3, 1);
  const DatasetManifest back = manifest_from_json(manifest_to_json(m));
  EXPECT_EQ(manifest_hash(back), manifest_hash(m));
  m.snr_db = 21.0;
  EXPECT_NE(manifest_hash(back), manifest_hash(m));
  DatasetManifest bad = tiny_manifest();
  bad.n_devices = 0;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  EXPECT_THROW(manifest_from_json("{not json"), FormatError);
}

TEST(Augment, CfoDistributions) {
  Rng rng(1);
  CfoDistribution u{CfoDistribution::Kind::kUniform, -10.0, 30.0};
  CfoDistribution b{CfoDistribution::Kind::kBernoulli, -40.0, 40.0};
  int lo = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = u.draw(rng);
    ASSERT_GE(v, -10.0);
    ASSERT_LE(v, 30.0);
    const double w = b.draw(rng);
    ASSERT_TRUE(w == -40.0 || w == 40.0);
    lo += w == -40.0;
  }
  EXPECT_NEAR(lo / 1e4, 0.5, 0.03);
}

AugmentationPolicy policy(AugKind kind, Assignment a, int mult) {
  AugmentationPolicy p;
  p.kind = kind;
  p.assignment = a;
  p.multiplier = mult;
  return p;
}

std::map<int, std::vector<double>> cfo_by_device(const AugmentedSet& s) {
  std::map<int, std::vector<double>> out;
  for (std::size_t i = 0; i < s.packets.size(); ++i) out[s.packets.labels[i]].push_back(*s.draws[i].cfo_ppm);
  for (auto& [d, v] : out) std::sort(v.begin(), v.end());
  return out;
}

TEST(Augment, OrthogonalPolicySharesParameterMultiset) {
  const auto spec = tiny_dataset().manifest.preamble_spec();
  const AugmentedSet s =
      augment_train(tiny_dataset().train, policy(AugKind::kCfoChannel, Assignment::kOrthogonal, 4), 7, spec);
  ASSERT_EQ(s.packets.size(), 4 * tiny_dataset().train.size());
  const auto by_dev = cfo_by_device(s);
  for (const auto& [d, v] : by_dev) EXPECT_EQ(v, by_dev.at(0)) << d;
  std::map<int, std::multiset<double>> gains;
  for (std::size_t i = 0; i < s.packets.size(); ++i) {
    gains[s.packets.labels[i]].insert(std::abs(s.draws[i].channel->tap_gains[0]));
  }
  for (const auto& [d, g] : gains) EXPECT_EQ(g, gains.at(0)) << d;

  const AugmentedSet r = augment_train(tiny_dataset().train, policy(AugKind::kCfo, Assignment::kRandom, 4), 7, spec);
  const auto rnd = cfo_by_device(r);
  EXPECT_NE(rnd.at(1), rnd.at(0));
  EXPECT_FALSE(r.draws[0].channel.has_value());
}

TEST(Augment, SeparateCfoAssignment) {
  const auto spec = tiny_dataset().manifest.preamble_spec();
  AugmentationPolicy p = policy(AugKind::kCfoChannel, Assignment::kOrthogonal, 3);
  p.cfo_assignment = Assignment::kRandom;
  const AugmentedSet s = augment_train(tiny_dataset().train, p, 8, spec);
  const auto by_dev = cfo_by_device(s);
  EXPECT_NE(by_dev.at(1), by_dev.at(0));
  std::map<int, std::multiset<double>> gains;
  for (std::size_t i = 0; i < s.packets.size(); ++i) {
    gains[s.packets.labels[i]].insert(std::abs(s.draws[i].channel->tap_gains[3]));
  }
  EXPECT_EQ(gains.at(1), gains.at(0));
}

TEST(Augment, CopiesAreDrawsAppliedToSource) {
  const PacketSet& src = tiny_dataset().train;
  const auto spec = tiny_dataset().manifest.preamble_spec();
  const AugmentedSet s = augment_train(src, policy(AugKind::kCfoChannel, Assignment::kRandom, 2), 11, spec);
  const std::size_t n = src.size();
  for (std::size_t i : {std::size_t{0}, n + 3}) {
    const std::size_t orig = i % n;
    EXPECT_EQ(s.packets.labels[i], src.labels[orig]);
    std::vector<cdouble> x(src.packet_length);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = src.packet(orig)[k];
    apply_draw(x, s.draws[i], spec);
    preamble::normalize_power_inplace(x);
    for (std::size_t k = 0; k < x.size(); ++k) {
      ASSERT_LT(std::abs(x[k] - cdouble(s.packets.packet(i)[k])), 1e-5) << i;
    }
  }
  const AugmentedSet none = augment_train(src, policy(AugKind::kNone, Assignment::kRandom, 1), 11, spec);
  EXPECT_TRUE(same_packets(none.packets, src));
  EXPECT_THROW(augment_train(src, policy(AugKind::kCfo, Assignment::kRandom, 0), 1, spec), std::invalid_argument);
}

TEST(Metrics, ConfusionStructure) {
  const std::vector<int> labels = {0, 1, 2, 2, 1, 0};
  const Metrics id = metrics(labels, labels, 3);
  EXPECT_EQ(id.accuracy, 1.0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_EQ(id.confusion[i][j], i == j ? 2 : 0);
  }
  const std::vector<int> zeros(6, 0);
  const Metrics z = metrics(zeros, labels, 3);
  EXPECT_NEAR(z.accuracy, 1.0 / 3.0, 1e-15);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(z.confusion[i][0], 2);
    EXPECT_EQ(z.confusion[i][1] + z.confusion[i][2], 0);
  }
  EXPECT_THROW(metrics(zeros, std::vector<int>{0}, 3), std::invalid_argument);
}

TEST(Metrics, RandomGuessingIsChance) {
  Rng rng(3);
  std::uniform_int_distribution<int> u(0, 18);
  std::vector<int> p(10000), l(10000);
  for (int i = 0; i < 10000; ++i) {
    p[i] = u(rng);
    l[i] = u(rng);
  }
  // Binomial standard error at n = 1e4 is 0.0022.
  EXPECT_NEAR(metrics(p, l, 19).accuracy, 1.0 / 19.0, 0.01);
}

TEST(Metrics, ArgmaxAndSampleStd) {
  const std::vector<double> probs = {0.1, 0.7, 0.2, 0.5, 0.3, 0.2};
  EXPECT_EQ(argmax_rows(probs, 3), (std::vector<int>{1, 0}));
  const std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_NEAR(sample_std(v), std::sqrt(32.0 / 7.0), 1e-14);
  EXPECT_EQ(sample_std(std::vector<double>{3.0}), 0.0);
}

TEST(Folds, PartitionAndBalance) {
  std::vector<int> labels;
  for (int i = 0; i < 103; ++i) labels.push_back(i % 7 == 0 ? 2 : i % 3 == 0 ? 1 : 0);
  for (int k : {2, 5}) {
    const auto folds = stratified_folds(labels, k, 4);
    ASSERT_EQ(folds.size(), static_cast<std::size_t>(k));
    std::vector<int> seen(labels.size(), 0);
    for (const auto& f : folds) {
      for (std::size_t i : f) ++seen[i];
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    for (int c = 0; c < 3; ++c) {
      int lo = 1 << 30, hi = 0;
      for (const auto& f : folds) {
        const int n = static_cast<int>(std::count_if(f.begin(), f.end(), [&](std::size_t i) { return labels[i] == c; }));
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      EXPECT_LE(hi - lo, 1) << "k=" << k << " class=" << c;
    }
  }
  EXPECT_EQ(stratified_folds(labels, 5, 4), stratified_folds(labels, 5, 4));
  EXPECT_THROW(stratified_folds(labels, 1, 0), std::invalid_argument);
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.dataset = tiny_manifest();
  c.n_train_days = 3;
  c.n_runs = 2;
  c.train.epochs = 2;
  c.train.batch_size = 9;
  c.augmentation = policy(AugKind::kCfoChannel, Assignment::kOrthogonal, 2);
  c.tta_list = {0, 2};
  c.master_seed = 5;
  return c;
}

TEST(Config, JsonRoundTripAndScale) {
  ExperimentConfig c = tiny_config();
  c.augmentation.cfo_assignment = Assignment::kRandom;
  c.augmentation.cfo = {CfoDistribution::Kind::kBernoulli, -20.0, 20.0};
  const ExperimentConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));

  const ExperimentConfig desk = config_from_json(R"({"scale": "desk", "augmentation": {"kind": "cfo"}})");
  EXPECT_EQ(desk.dataset.train_per_device, 100);
  EXPECT_EQ(desk.train.epochs, 50);
  EXPECT_EQ(desk.augmentation.multiplier, 10);
  const ExperimentConfig paper = config_from_json(R"({"scale": "paper"})");
  EXPECT_EQ(paper.dataset.train_per_device, 200);
  EXPECT_EQ(paper.train.epochs, 200);
  EXPECT_THROW(config_from_json(R"({"scale": "huge"})"), std::invalid_argument);

  ExperimentConfig bad = tiny_config();
  bad.residual = true;
  bad.equalize = true;
  EXPECT_THROW(validate(bad), std::invalid_argument);
}

TEST(Experiment, PlanIsKeyedPerRun) {
  const ExperimentConfig c = tiny_config();
  const RunRecord a = plan_run(c, 0), b = plan_run(c, 0), r1 = plan_run(c, 1);
  EXPECT_EQ(a.emulation_seed, b.emulation_seed);
  EXPECT_EQ(a.train_days.size(), 3u);
  EXPECT_EQ(a.test_day.day_index, 3);
  EXPECT_NE(a.emulation_seed, r1.emulation_seed);
  EXPECT_NE(a.init_seed, r1.init_seed);
  const std::set<std::uint64_t> seeds = {a.emulation_seed, a.init_seed, a.augment_seed, a.tta_seed};
  EXPECT_EQ(seeds.size(), 4u);
  ExperimentConfig same = c;
  same.same_day_test = true;
  EXPECT_EQ(plan_run(same, 0).test_day.day_index, 0);
}

TEST(Experiment, CfoCompensationUndoesOffset) {
  ExperimentConfig c = tiny_config();
  c.cfo_comp = true;
  const auto spec = c.dataset.preamble_spec();
  std::vector<cdouble> clean(spec.length());
  for (std::size_t n = 0; n < clean.size(); ++n) clean[n] = tiny_dataset().train.packet(0)[n];
  preamble::normalize_power_inplace(clean);
  std::vector<cdouble> x = clean;
  confounders::apply_cfo_inplace(x, confounders::ppm_to_theta(31.0, 5.8e9, spec.sample_rate_hz()));
  preprocess_packet(x, c, spec);
  // The estimate is taken on a noisy packet, so the ramp is removed up to a
  // small residual offset.
  const double theta_left = dsp::estimate_cfo_two_step(x, spec);
  EXPECT_LT(std::abs(confounders::theta_to_ppm(theta_left, 5.8e9, spec.sample_rate_hz())), 0.5);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
  ExperimentConfig c = tiny_config();
  const ExperimentReport a = run_experiment(c, &tiny_dataset());
  c.threads = 2;
  const ExperimentReport b = run_experiment(c, &tiny_dataset());
  ASSERT_EQ(a.results.size(), 2u);
  for (std::size_t t = 0; t < a.results.size(); ++t) {
    EXPECT_EQ(a.results[t].run_accuracies, b.results[t].run_accuracies);
    EXPECT_EQ(a.results[t].confusion, b.results[t].confusion);
  }
  for (const TtaResult& r : a.results) {
    ASSERT_EQ(r.run_accuracies.size(), 2u);
    const double mean = (r.run_accuracies[0] + r.run_accuracies[1]) / 2.0;
    EXPECT_NEAR(r.mean, mean, 1e-15);
    EXPECT_NEAR(r.std, sample_std(r.run_accuracies), 1e-15);
    for (const auto& row : r.confusion) EXPECT_EQ(std::accumulate(row.begin(), row.end(), 0), 2 * 4);
  }
  EXPECT_EQ(a.result_for(2).n_tta, 2);
  EXPECT_THROW(a.result_for(7), std::out_of_range);
  EXPECT_NE(report_to_json(a).find("run_accuracies"), std::string::npos);
  const std::string csv = history_to_csv(a.runs);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 2);
}

TEST(Experiment, CrossValidationCoversPool) {
  ExperimentConfig c = tiny_config();
  c.augmentation = policy(AugKind::kNone, Assignment::kRandom, 1);
  c.tta_list = {0};
  c.train.epochs = 1;
  const CrossValidationReport r = cross_validate(c, 2, &tiny_dataset());
  ASSERT_EQ(r.folds.size(), 2u);
  int total = 0;
  for (const FoldReport& f : r.folds) {
    for (const auto& row : f.confusion) total += std::accumulate(row.begin(), row.end(), 0);
  }
  EXPECT_EQ(total, 18 + 6);
  EXPECT_NE(cv_report_to_json(r).find("folds"), std::string::npos);
}

}  // namespace
}  // namespace rfp::harness
