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
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "harness_internal.hpp"
#include "rfp/dsp_comp.hpp"
#include "rfp/harness.hpp"

namespace rfp::harness {

namespace {

using json = nlohmann::json;

json policy_to_json(const AugmentationPolicy& p) {
  json j = {{"kind", to_string(p.kind)},
            {"assignment", to_string(p.assignment)},
            {"cfo_distribution",
             {{"kind", p.cfo.kind == CfoDistribution::Kind::kBernoulli ? "bernoulli" : "uniform"},
              {"lo_ppm", p.cfo.lo_ppm},
              {"hi_ppm", p.cfo.hi_ppm}}},
            {"multiplier", p.multiplier},
            {"tta_reduce", to_string(p.tta_reduce)}};
  j["cfo_assignment"] = p.cfo_assignment ? json(to_string(*p.cfo_assignment)) : json(nullptr);
  return j;
}

AugmentationPolicy policy_from_json(const json& j) {
  AugmentationPolicy p;
  p.kind = aug_kind_from_string(j.value("kind", std::string("none")));
  p.assignment = assignment_from_string(j.value("assignment", std::string("random")));
  if (j.contains("cfo_assignment") && !j["cfo_assignment"].is_null()) {
    p.cfo_assignment = assignment_from_string(j["cfo_assignment"].get<std::string>());
  }
  if (j.contains("cfo_distribution")) {
    const json& d = j["cfo_distribution"];
    const std::string kind = d.value("kind", std::string("uniform"));
    if (kind == "bernoulli") {
      p.cfo.kind = CfoDistribution::Kind::kBernoulli;
    } else if (kind != "uniform") {
      throw std::invalid_argument("unknown CFO distribution '" + kind + "'");
    }
    p.cfo.lo_ppm = d.value("lo_ppm", p.cfo.lo_ppm);
    p.cfo.hi_ppm = d.value("hi_ppm", p.cfo.hi_ppm);
  }
  p.multiplier = j.value("multiplier", p.multiplier);
  p.tta_reduce = tta_reduce_from_string(j.value("tta_reduce", std::string("softmax_mean")));
  return p;
}

json day_to_json(const confounders::DayRealization& d) {
  json cfo = json::object();
  for (const auto& [dev, ppm] : d.per_device_cfo_ppm) cfo[std::to_string(dev)] = ppm;
  json ch = json::object();
  for (const auto& [dev, c] : d.per_device_channel) {
    json gains = json::array();
    for (const cdouble& g : c.tap_gains) gains.push_back({g.real(), g.imag()});
    ch[std::to_string(dev)] = {{"tap_gains", gains}, {"tap_delays_samples", c.tap_delays_samples}};
  }
  return {{"day_index", d.day_index}, {"seed", d.seed}, {"cfo_ppm", cfo}, {"channel", ch}};
}

// Index of each packet within its class, in order of appearance.
std::vector<int> index_within_class(const std::vector<int>& labels) {
  std::vector<int> counts;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    if (counts.size() <= y) counts.resize(y + 1, 0);
    out[i] = counts[y]++;
  }
  return out;
}

confounders::DayConfig day_config(const ExperimentConfig& cfg, int day, std::uint64_t seed) {
  confounders::DayConfig dc;
  dc.day_index = day;
  dc.seed = seed;
  dc.cfo_range_ppm = cfg.cfo_range_ppm;
  dc.use_cfo = cfg.use_cfo;
  dc.use_channel = cfg.use_channel;
  dc.carrier_freq_hz = cfg.dataset.carrier_freq_hz;
  dc.sample_rate_hz = cfg.dataset.preamble_spec().sample_rate_hz();
  return dc;
}

// Emulates each packet on day (index within class mod n_days), then
// preprocesses it.
PacketSet emulate_split(const PacketSet& clean, const std::vector<confounders::DayRealization>& days,
                        const std::vector<confounders::DayConfig>& day_cfgs, bool spread_over_days,
                        const ExperimentConfig& cfg) {
  const preamble::PreambleSpec spec = cfg.dataset.preamble_spec();
  const std::vector<int> idx = index_within_class(clean.labels);
  PacketSet out;
  out.packet_length = clean.packet_length;
  out.reserve(clean.size());
  std::vector<cdouble> buf(clean.packet_length);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const std::size_t d = spread_over_days ? static_cast<std::size_t>(idx[i]) % days.size() : 0;
    const auto src = clean.packet(i);
    buf.assign(src.begin(), src.end());
    confounders::apply_day_to_packet(buf, days[d], clean.labels[i], day_cfgs[d]);
    preprocess_packet(buf, cfg, spec);
    out.push_back(std::span<const cdouble>(buf), clean.labels[i]);
  }
  return out;
}

Dataset obtain_dataset(const ExperimentConfig& cfg, const Dataset* data) {
  if (data != nullptr) return *data;
  return generate_dataset(cfg.dataset, cfg.threads);
}

void check_dataset(const ExperimentConfig& cfg, const Dataset& data) {
  if (data.manifest.n_devices != cfg.dataset.n_devices ||
      data.manifest.oversample_factor != cfg.dataset.oversample_factor) {
    throw std::invalid_argument("dataset does not match the experiment's manifest");
  }
  if (data.train.size() == 0 || data.test.size() == 0) throw std::invalid_argument("dataset has an empty split");
}

}  // namespace

ScalePreset scale_from_string(const std::string& s) {
  if (s == "desk") return ScalePreset::kDesk;
  if (s == "paper") return ScalePreset::kPaper;
  throw std::invalid_argument("unknown scale preset '" + s + "'");
}

namespace {

void scale_augmentation(ExperimentConfig& cfg, ScalePreset preset) {
  const bool desk = preset == ScalePreset::kDesk;
  if (cfg.augmentation.kind != AugKind::kNone) {
    cfg.augmentation.multiplier = desk ? 10 : 20;
    cfg.tta_list = {0, 1, 100};
  } else {
    cfg.augmentation.multiplier = 1;
  }
}

}  // namespace

void apply_scale(ExperimentConfig& cfg, ScalePreset preset) {
  const bool desk = preset == ScalePreset::kDesk;
  cfg.dataset.n_devices = 19;
  cfg.dataset.train_per_device = desk ? 100 : 200;
  cfg.dataset.val_per_device = 100;
  cfg.dataset.test_per_device = 100;
  cfg.train.epochs = desk ? 50 : 200;
  scale_augmentation(cfg, preset);
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.dataset);
  validate(cfg.augmentation);
  nn::validate(cfg.train);
  if (cfg.residual && cfg.equalize) {
    throw std::invalid_argument("residual input and equalized input are mutually exclusive");
  }
  if (cfg.n_train_days < 1) throw std::invalid_argument("n_train_days must be >= 1");
  if (cfg.n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  if (cfg.tta_list.empty()) throw std::invalid_argument("tta_list must not be empty");
  for (int t : cfg.tta_list) {
    if (t < 0) throw std::invalid_argument("tta_list entries must be >= 0");
  }
  if (cfg.cfo_range_ppm.first > cfg.cfo_range_ppm.second) throw std::invalid_argument("CFO range must satisfy lo <= hi");
  if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
  (void)network_for(cfg);
}

nn::NetworkSpec network_for(const ExperimentConfig& cfg) {
  const int len = static_cast<int>(cfg.dataset.preamble_spec().length());
  const int n = cfg.dataset.n_devices;
  if (cfg.network == "wifi_complex") return nn::wifi_complex(n, nn::Activation::kModReLU, len);
  if (cfg.network == "wifi_complex_crelu") return nn::wifi_complex(n, nn::Activation::kCReLU, len);
  if (cfg.network == "wifi_real") return nn::wifi_real(cfg.real_channel_scale, n, cfg.dropout, len);
  throw std::invalid_argument("unknown network '" + cfg.network + "'");
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j = {{"name", cfg.name},
            {"dataset", json::parse(manifest_to_json(cfg.dataset))},
            {"n_train_days", cfg.n_train_days},
            {"same_day_test", cfg.same_day_test},
            {"use_cfo", cfg.use_cfo},
            {"use_channel", cfg.use_channel},
            {"cfo_range_ppm", {cfg.cfo_range_ppm.first, cfg.cfo_range_ppm.second}},
            {"cfo_comp", cfg.cfo_comp},
            {"equalize", cfg.equalize},
            {"residual", cfg.residual},
            {"augmentation", policy_to_json(cfg.augmentation)},
            {"tta_list", cfg.tta_list},
            {"network", cfg.network},
            {"real_channel_scale", cfg.real_channel_scale},
            {"dropout", cfg.dropout},
            {"train",
             {{"epochs", cfg.train.epochs},
              {"batch_size", cfg.train.batch_size},
              {"learning_rate", cfg.train.learning_rate},
              {"weight_decay", cfg.train.weight_decay}}},
            {"track_validation", cfg.track_validation},
            {"n_runs", cfg.n_runs},
            {"master_seed", cfg.master_seed},
            {"threads", cfg.threads}};
  j["dataset"].erase("manifest_hash");
  j["dataset"].erase("files");
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed experiment config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("scale")) apply_scale(c, scale_from_string(j["scale"].get<std::string>()));
    c.name = j.value("name", c.name);
    if (j.contains("dataset")) {
      json d = j["dataset"];
      json base = json::parse(manifest_to_json(c.dataset));
      base.erase("profiles");
      base.merge_patch(d);
      base.erase("manifest_hash");
      c.dataset = manifest_from_json(base.dump());
    }
    c.n_train_days = j.value("n_train_days", c.n_train_days);
    c.same_day_test = j.value("same_day_test", c.same_day_test);
    c.use_cfo = j.value("use_cfo", c.use_cfo);
    c.use_channel = j.value("use_channel", c.use_channel);
    if (j.contains("cfo_range_ppm")) {
      c.cfo_range_ppm = {j["cfo_range_ppm"].at(0).get<double>(), j["cfo_range_ppm"].at(1).get<double>()};
    }
    c.cfo_comp = j.value("cfo_comp", c.cfo_comp);
    c.equalize = j.value("equalize", c.equalize);
    c.residual = j.value("residual", c.residual);
    if (j.contains("augmentation")) {
      c.augmentation = policy_from_json(j["augmentation"]);
      if (j.contains("scale") && !j["augmentation"].contains("multiplier")) {
        scale_augmentation(c, scale_from_string(j["scale"].get<std::string>()));
      }
    }
    if (j.contains("tta_list")) c.tta_list = j["tta_list"].get<std::vector<int>>();
    c.network = j.value("network", c.network);
    c.real_channel_scale = j.value("real_channel_scale", c.real_channel_scale);
    c.dropout = j.value("dropout", c.dropout);
    if (j.contains("train")) {
      const json& t = j["train"];
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.batch_size = t.value("batch_size", c.train.batch_size);
      c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
      c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
    }
    c.track_validation = j.value("track_validation", c.track_validation);
    c.n_runs = j.value("n_runs", c.n_runs);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed experiment config: ") + e.what());
  }
  validate(c);
  return c;
}

void preprocess_packet(std::vector<cdouble>& x, const ExperimentConfig& cfg, const preamble::PreambleSpec& spec) {
  if (x.size() != spec.length()) throw std::invalid_argument("packet is not a full preamble");
  if (cfg.cfo_comp || cfg.residual) {
    double theta = dsp::estimate_cfo_two_step(x, spec);
    if (cfg.cfo_comp) {
      dsp::compensate_cfo_inplace(x, theta);
      theta = 0.0;
    }
    if (cfg.residual) {
      std::vector<cdouble> derotated = x;
      dsp::compensate_cfo_inplace(derotated, theta);
      const dsp::ChannelEstimate est = dsp::estimate_channel_ltf(derotated, spec);
      ComplexSignal sig{std::move(x), spec.sample_rate_hz()};
      x = dsp::compute_residual(sig, spec, theta, est, /*normalize=*/true).samples;
      return;
    }
  }
  if (cfg.equalize) {
    const dsp::ChannelEstimate est = dsp::estimate_channel_ltf(x, spec);
    dsp::equalize_inplace(x, est);
  }
  preamble::normalize_power_inplace(x);
}

RunRecord plan_run(const ExperimentConfig& cfg, int run) {
  RunRecord rec;
  rec.run = run;
  const std::uint64_t run_seed = make_rng({cfg.master_seed, Stream::kRun, static_cast<std::uint64_t>(run), 0, 0})();
  rec.emulation_seed = derive_seed(run_seed, 0);
  rec.init_seed = derive_seed(run_seed, 1);
  rec.augment_seed = derive_seed(run_seed, 2);
  rec.tta_seed = derive_seed(run_seed, 3);
  std::vector<int> device_ids(static_cast<std::size_t>(cfg.dataset.n_devices));
  std::iota(device_ids.begin(), device_ids.end(), 0);
  for (int d = 0; d < cfg.n_train_days; ++d) {
    rec.train_days.push_back(confounders::draw_day(day_config(cfg, d, rec.emulation_seed), device_ids));
  }
  const int test_day = cfg.same_day_test ? 0 : cfg.n_train_days;
  rec.test_day = confounders::draw_day(day_config(cfg, test_day, rec.emulation_seed), device_ids);
  return rec;
}

namespace {

std::vector<confounders::DayConfig> train_day_configs(const ExperimentConfig& cfg, const RunRecord& rec) {
  std::vector<confounders::DayConfig> out;
  for (int d = 0; d < cfg.n_train_days; ++d) out.push_back(day_config(cfg, d, rec.emulation_seed));
  return out;
}

PacketSet emulate_test(const ExperimentConfig& cfg, const Dataset& data, const RunRecord& rec) {
  const confounders::DayConfig test_cfg = day_config(cfg, rec.test_day.day_index, rec.emulation_seed);
  return emulate_split(data.test, {rec.test_day}, {test_cfg}, false, cfg);
}

std::vector<std::vector<int>> predict_all(nn::Network<float>& net, const ExperimentConfig& cfg,
                                          const PacketSet& test, std::uint64_t tta_seed) {
  std::vector<std::vector<int>> out;
  const preamble::PreambleSpec spec = cfg.dataset.preamble_spec();
  for (int n_tta : cfg.tta_list) {
    const auto probs = predict_tta(net, test, cfg.augmentation, n_tta, tta_seed, spec);
    out.push_back(argmax_rows(probs, net.num_classes()));
  }
  return out;
}

}  // namespace

std::vector<Metrics> evaluate_run(nn::Network<float>& net, const ExperimentConfig& cfg, const Dataset& data, int run) {
  validate(cfg);
  check_dataset(cfg, data);
  if (net.spec().input_len != static_cast<int>(cfg.dataset.preamble_spec().length()) ||
      net.num_classes() != cfg.dataset.n_devices) {
    throw std::invalid_argument("model does not match the experiment's input length or class count");
  }
  const RunRecord rec = plan_run(cfg, run);
  const PacketSet test = emulate_test(cfg, data, rec);
  std::vector<Metrics> out;
  for (const auto& preds : predict_all(net, cfg, test, rec.tta_seed)) {
    out.push_back(metrics(preds, test.labels, cfg.dataset.n_devices));
  }
  return out;
}

RunOutput run_single(const ExperimentConfig& cfg, const Dataset& data, int run, nn::Network<float>* trained) {
  RunOutput out;
  out.record = plan_run(cfg, run);
  RunRecord& rec = out.record;
  const std::vector<confounders::DayConfig> day_cfgs = train_day_configs(cfg, rec);

  const preamble::PreambleSpec spec = cfg.dataset.preamble_spec();
  const PacketSet train_pre = emulate_split(data.train, rec.train_days, day_cfgs, true, cfg);
  const PacketSet test_pre = emulate_test(cfg, data, rec);
  PacketSet val_pre;
  if (cfg.track_validation && data.val.size() > 0) {
    val_pre = emulate_split(data.val, rec.train_days, day_cfgs, true, cfg);
  }

  nn::Network<float> net(network_for(cfg));
  net.init_glorot(rec.init_seed);
  nn::TrainConfig tc = cfg.train;
  tc.seed = rec.init_seed;
  const PacketSet* val = val_pre.size() > 0 ? &val_pre : nullptr;
  if (cfg.augmentation.kind == AugKind::kNone && cfg.augmentation.multiplier == 1) {
    rec.history = nn::train(net, train_pre, val, tc);
  } else {
    const AugmentedSet aug = augment_train(train_pre, cfg.augmentation, rec.augment_seed, spec);
    rec.history = nn::train(net, aug.packets, val, tc);
  }

  out.labels = test_pre.labels;
  out.predictions = predict_all(net, cfg, test_pre, rec.tta_seed);
  if (trained != nullptr) *trained = std::move(net);
  return out;
}

const TtaResult& ExperimentReport::result_for(int n_tta) const {
  for (const TtaResult& r : results) {
    if (r.n_tta == n_tta) return r;
  }
  throw std::out_of_range("no result for n_tta=" + std::to_string(n_tta));
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset* data) {
  validate(cfg);
  const Dataset ds = obtain_dataset(cfg, data);
  check_dataset(cfg, ds);
  ExperimentReport report;
  report.config = cfg;
  report.warnings = ds.warnings;
  if (cfg.augmentation.kind == AugKind::kNone &&
      std::any_of(cfg.tta_list.begin(), cfg.tta_list.end(), [](int t) { return t > 0; })) {
    report.warnings.push_back("test-time augmentation requested without an augmentation kind; copies are identical");
  }

  std::vector<RunOutput> outputs(static_cast<std::size_t>(cfg.n_runs));
  detail::parallel_for(outputs.size(), cfg.threads,
                       [&](std::size_t r) { outputs[r] = run_single(cfg, ds, static_cast<int>(r)); });

  const int c_n = cfg.dataset.n_devices;
  for (std::size_t t = 0; t < cfg.tta_list.size(); ++t) {
    TtaResult res;
    res.n_tta = cfg.tta_list[t];
    res.confusion.assign(static_cast<std::size_t>(c_n), std::vector<int>(static_cast<std::size_t>(c_n), 0));
    for (const RunOutput& o : outputs) {
      const Metrics m = metrics(o.predictions[t], o.labels, c_n);
      res.run_accuracies.push_back(m.accuracy);
      for (int a = 0; a < c_n; ++a) {
        for (int b = 0; b < c_n; ++b) res.confusion[a][b] += m.confusion[a][b];
      }
    }
    res.mean = std::accumulate(res.run_accuracies.begin(), res.run_accuracies.end(), 0.0) /
               static_cast<double>(res.run_accuracies.size());
    res.std = sample_std(res.run_accuracies);
    report.results.push_back(std::move(res));
  }
  for (RunOutput& o : outputs) report.runs.push_back(std::move(o.record));
  return report;
}

std::string report_to_json(const ExperimentReport& report) {
  json runs = json::array();
  for (const RunRecord& r : report.runs) {
    json days = json::array();
    for (const auto& d : r.train_days) days.push_back(day_to_json(d));
    runs.push_back({{"run", r.run},
                    {"seeds",
                     {{"emulation", r.emulation_seed},
                      {"init", r.init_seed},
                      {"augment", r.augment_seed},
                      {"tta", r.tta_seed}}},
                    {"train_days", days},
                    {"test_day", day_to_json(r.test_day)},
                    {"final_train_accuracy",
                     r.history.epochs.empty() ? json(nullptr) : json(r.history.epochs.back().train_accuracy)}});
  }
  json results = json::array();
  for (const TtaResult& t : report.results) {
    results.push_back({{"n_tta", t.n_tta},
                       {"run_accuracies", t.run_accuracies},
                       {"mean", t.mean},
                       {"std", t.std},
                       {"confusion", t.confusion}});
  }
  json j = {{"config", json::parse(config_to_json(report.config))},
            {"carrier_freq_hz", report.config.dataset.carrier_freq_hz},
            {"results", results},
            {"runs", runs},
            {"warnings", report.warnings}};
  return j.dump(2);
}

std::string confusion_to_csv(const std::vector<std::vector<int>>& confusion) {
  std::ostringstream os;
  os << "true\\pred";
  for (std::size_t c = 0; c < confusion.size(); ++c) os << ',' << c;
  os << '\n';
  for (std::size_t r = 0; r < confusion.size(); ++r) {
    os << r;
    for (int v : confusion[r]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

std::string history_to_csv(const std::vector<RunRecord>& runs) {
  std::ostringstream os;
  os.precision(9);
  os << "run,epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
  for (const RunRecord& r : runs) {
    for (const nn::EpochStats& e : r.history.epochs) {
      os << r.run << ',' << e.epoch << ',' << e.train_loss << ',' << e.train_accuracy << ',';
      if (std::isnan(e.val_loss)) {
        os << ",\n";
      } else {
        os << e.val_loss << ',' << e.val_accuracy << '\n';
      }
    }
  }
  return os.str();
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  std::vector<std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw std::invalid_argument("negative label");
    const auto y = static_cast<std::size_t>(labels[i]);
    if (by_class.size() <= y) by_class.resize(y + 1);
    by_class[y].push_back(i);
  }
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  // Rotating the starting fold per class keeps fold sizes within one packet.
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    Rng rng = make_rng({seed, Stream::kFolds, c, 0, 0});
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i) folds[(cursor + i) % folds.size()].push_back(members[i]);
    cursor = (cursor + members.size()) % folds.size();
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

CrossValidationReport cross_validate(const ExperimentConfig& cfg, int k, const Dataset* data) {
  validate(cfg);
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  const Dataset ds = obtain_dataset(cfg, data);
  check_dataset(cfg, ds);

  // Pool train and val packets, emulated over the training days.
  PacketSet pool = ds.train;
  pool.samples.insert(pool.samples.end(), ds.val.samples.begin(), ds.val.samples.end());
  pool.labels.insert(pool.labels.end(), ds.val.labels.begin(), ds.val.labels.end());
  const RunRecord plan = plan_run(cfg, 0);
  const std::uint64_t run_seed = plan.emulation_seed;
  const PacketSet emulated = emulate_split(pool, plan.train_days, train_day_configs(cfg, plan), true, cfg);
  const auto folds = stratified_folds(emulated.labels, k, cfg.master_seed);
  const preamble::PreambleSpec spec = cfg.dataset.preamble_spec();
  const int c_n = ds.manifest.n_devices;
  const int n_tta = cfg.tta_list.back();

  CrossValidationReport rep;
  rep.k = k;
  rep.folds.resize(static_cast<std::size_t>(k));
  detail::parallel_for(static_cast<std::size_t>(k), cfg.threads, [&](std::size_t f) {
    std::vector<char> held(emulated.size(), 0);
    for (std::size_t i : folds[f]) held[i] = 1;
    PacketSet tr, te;
    tr.packet_length = te.packet_length = emulated.packet_length;
    for (std::size_t i = 0; i < emulated.size(); ++i) (held[i] ? te : tr).push_back(emulated.packet(i), emulated.labels[i]);
    const std::uint64_t fold_seed = derive_seed(run_seed, 100 + f);
    nn::Network<float> net(network_for(cfg));
    net.init_glorot(derive_seed(fold_seed, 1));
    nn::TrainConfig tc = cfg.train;
    tc.seed = derive_seed(fold_seed, 1);
    if (cfg.augmentation.kind == AugKind::kNone && cfg.augmentation.multiplier == 1) {
      nn::train(net, tr, nullptr, tc);
    } else {
      nn::train(net, augment_train(tr, cfg.augmentation, derive_seed(fold_seed, 2), spec).packets, nullptr, tc);
    }
    const auto probs = predict_tta(net, te, cfg.augmentation, n_tta, derive_seed(fold_seed, 3), spec);
    const Metrics m = metrics(argmax_rows(probs, c_n), te.labels, c_n);
    rep.folds[f] = {static_cast<int>(f), m.accuracy, m.confusion};
  });
  std::vector<double> accs;
  for (const FoldReport& f : rep.folds) accs.push_back(f.accuracy);
  rep.mean = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
  rep.std = sample_std(accs);
  return rep;
}

std::string cv_report_to_json(const CrossValidationReport& report) {
  json folds = json::array();
  for (const FoldReport& f : report.folds) {
    folds.push_back({{"fold", f.fold}, {"accuracy", f.accuracy}, {"confusion", f.confusion}});
  }
  return json{{"k", report.k}, {"folds", folds}, {"mean", report.mean}, {"std", report.std}}.dump(2);
}

}  // namespace rfp::harness
