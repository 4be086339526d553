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

// rfp: command-line front end over the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rfp/rfp.h"

namespace {

using json = nlohmann::json;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(rfp_status st) {
  if (st != RFP_OK) throw CliError(std::string("error ") + std::to_string(st) + ": " + rfp_last_error());
}

// Owns a string returned by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { rfp_string_free(p); }
  std::string str() const { return p != nullptr ? p : ""; }
};

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CliError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  if (path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw CliError("cannot write " + path);
  os << text;
}

struct DatasetGuard {
  rfp_dataset* p = nullptr;
  ~DatasetGuard() { rfp_dataset_free(p); }
};

struct ModelGuard {
  rfp_model* p = nullptr;
  ~ModelGuard() { rfp_model_free(p); }
};

struct ManifestFlags {
  std::optional<int> devices, train, val, test, oversample;
  std::optional<double> snr, carrier;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--devices", devices, "Number of simulated devices");
    app->add_option("--train-packets", train, "Training packets per device");
    app->add_option("--val-packets", val, "Validation packets per device");
    app->add_option("--test-packets", test, "Test packets per device");
    app->add_option("--oversample", oversample, "Oversampling factor over 20 MHz");
    app->add_option("--snr", snr, "SNR in dB");
    app->add_option("--carrier", carrier, "Carrier frequency in Hz");
    app->add_option("--data-seed", seed, "Master seed of the dataset");
  }

  void apply(json& m) const {
    if (devices) m["n_devices"] = *devices;
    if (train) m["train_per_device"] = *train;
    if (val) m["val_per_device"] = *val;
    if (test) m["test_per_device"] = *test;
    if (oversample) m["oversample_factor"] = *oversample;
    if (snr) m["snr_db"] = *snr;
    if (carrier) m["carrier_freq_hz"] = *carrier;
    if (seed) m["master_seed"] = *seed;
  }
};

struct ExperimentFlags {
  std::string config_path, scale = "desk", data_dir;
  ManifestFlags manifest;
  std::optional<int> days, epochs, batch, runs, threads, multiplier;
  std::optional<double> lr, wd, cfo_lo, cfo_hi;
  std::optional<std::string> aug, assign, cfo_assign, cfo_dist, tta_reduce, network, name;
  std::optional<std::vector<int>> tta;
  std::optional<std::uint64_t> seed;
  bool same_day = false, no_cfo = false, no_channel = false, cfo_comp = false, equalize = false, residual = false;
  bool track_val = false;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "Experiment config JSON (flags override it)");
    app->add_option("--scale", scale, "Scale preset")->check(CLI::IsMember({"desk", "paper"}));
    app->add_option("--data", data_dir, "Dataset directory from 'gen' (generated on the fly otherwise)");
    manifest.add(app);
    app->add_option("--name", name, "Experiment name");
    app->add_option("--days", days, "Number of emulated training days");
    app->add_flag("--same-day", same_day, "Test on a training day");
    app->add_flag("--no-cfo", no_cfo, "Disable CFO confounder");
    app->add_flag("--no-channel", no_channel, "Disable multipath confounder");
    app->add_option("--aug", aug, "Augmentation kind")->check(CLI::IsMember({"none", "cfo", "channel", "cfo+channel"}));
    app->add_option("--assign", assign, "Augmentation assignment")->check(CLI::IsMember({"random", "orthogonal"}));
    app->add_option("--cfo-assign", cfo_assign, "Assignment of CFO draws")
        ->check(CLI::IsMember({"random", "orthogonal"}));
    app->add_option("--cfo-dist", cfo_dist, "CFO augmentation distribution")
        ->check(CLI::IsMember({"uniform", "bernoulli"}));
    app->add_option("--cfo-lo", cfo_lo, "Lower CFO augmentation bound (ppm)");
    app->add_option("--cfo-hi", cfo_hi, "Upper CFO augmentation bound (ppm)");
    app->add_option("--multiplier", multiplier, "Augmented copies per training packet");
    app->add_option("--tta", tta, "Test-time augmentation counts, e.g. --tta 0 1 100");
    app->add_option("--tta-reduce", tta_reduce, "TTA reduction")->check(CLI::IsMember({"softmax_mean", "logit_mean"}));
    app->add_flag("--cfo-comp", cfo_comp, "Estimate and remove CFO");
    app->add_flag("--equalize", equalize, "Equalize with the LTF channel estimate");
    app->add_flag("--residual", residual, "Feed the residual after subtracting the ideal reconstruction");
    app->add_option("--network", network, "Network")
        ->check(CLI::IsMember({"wifi_complex", "wifi_complex_crelu", "wifi_real"}));
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--batch", batch, "Batch size");
    app->add_option("--lr", lr, "Learning rate");
    app->add_option("--wd", wd, "Weight decay");
    app->add_option("--runs", runs, "Number of seeded runs");
    app->add_option("--seed", seed, "Experiment master seed");
    app->add_option("--threads", threads, "Worker threads");
    app->add_flag("--track-val", track_val, "Record validation metrics each epoch");
  }

  std::string build() const {
    json c = config_path.empty() ? json::object() : json::parse(read_file(config_path));
    if (!c.contains("scale")) c["scale"] = scale;
    json m = c.value("dataset", json::object());
    manifest.apply(m);
    if (!m.empty()) c["dataset"] = m;
    if (name) c["name"] = *name;
    if (days) c["n_train_days"] = *days;
    if (same_day) c["same_day_test"] = true;
    if (no_cfo) c["use_cfo"] = false;
    if (no_channel) c["use_channel"] = false;
    if (cfo_comp) c["cfo_comp"] = true;
    if (equalize) c["equalize"] = true;
    if (residual) c["residual"] = true;
    json a = c.value("augmentation", json::object());
    if (aug) a["kind"] = *aug;
    if (assign) a["assignment"] = *assign;
    if (cfo_assign) a["cfo_assignment"] = *cfo_assign;
    if (multiplier) a["multiplier"] = *multiplier;
    if (tta_reduce) a["tta_reduce"] = *tta_reduce;
    if (cfo_dist || cfo_lo || cfo_hi) {
      json d = a.value("cfo_distribution", json::object());
      if (cfo_dist) d["kind"] = *cfo_dist;
      if (cfo_lo) d["lo_ppm"] = *cfo_lo;
      if (cfo_hi) d["hi_ppm"] = *cfo_hi;
      a["cfo_distribution"] = d;
    }
    if (!a.empty()) c["augmentation"] = a;
    if (tta) c["tta_list"] = *tta;
    if (network) c["network"] = *network;
    json t = c.value("train", json::object());
    if (epochs) t["epochs"] = *epochs;
    if (batch) t["batch_size"] = *batch;
    if (lr) t["learning_rate"] = *lr;
    if (wd) t["weight_decay"] = *wd;
    if (!t.empty()) c["train"] = t;
    if (runs) c["n_runs"] = *runs;
    if (seed) c["master_seed"] = *seed;
    if (threads) c["threads"] = *threads;
    if (track_val) c["track_validation"] = true;
    return c.dump();
  }

  // Loads --data when given; the guard stays empty otherwise.
  void load(DatasetGuard& g) const {
    if (!data_dir.empty()) check(rfp_dataset_load(data_dir.c_str(), &g.p));
  }
};

void print_summary(const std::string& report) {
  const json r = json::parse(report);
  for (const json& res : r.at("results")) {
    std::printf("n_tta=%-4d", res.at("n_tta").get<int>());
    if (res.contains("mean")) {
      std::printf(" accuracy %.4f +/- %.4f\n", res.at("mean").get<double>(), res.at("std").get<double>());
    } else {
      std::printf(" accuracy %.4f\n", res.at("accuracy").get<double>());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rfp: RF fingerprinting with complex-valued CNNs"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate and save a dataset");
  ManifestFlags gen_flags;
  gen_flags.add(gen);
  std::string gen_out;
  int gen_threads = 1;
  std::string gen_scale;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--threads", gen_threads, "Worker threads");
  gen->add_option("--scale", gen_scale, "Use the preset's packet counts")->check(CLI::IsMember({"desk", "paper"}));

  // train
  auto* train = app.add_subcommand("train", "Train one run and save the model");
  ExperimentFlags train_flags;
  train_flags.add(train);
  std::string train_model, train_history;
  int train_run = 0;
  train->add_option("--model", train_model, "Checkpoint path")->required();
  train->add_option("--history", train_history, "Training history CSV");
  train->add_option("--run", train_run, "Run index (selects seeds and days)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on its run's test day");
  std::string eval_model, eval_config, eval_data, eval_report = "-", eval_confusion;
  int eval_run = -1;
  eval->add_option("--model", eval_model, "Checkpoint path")->required();
  eval->add_option("--config", eval_config, "Experiment config JSON (default: stored with the model)");
  eval->add_option("--data", eval_data, "Dataset directory");
  eval->add_option("--run", eval_run, "Run index (default: stored with the model)");
  eval->add_option("--report", eval_report, "Report JSON path ('-' for stdout)");
  eval->add_option("--confusion", eval_confusion, "Confusion matrix CSV");

  // exp
  auto* exp = app.add_subcommand("exp", "Run a full multi-run scenario");
  ExperimentFlags exp_flags;
  exp_flags.add(exp);
  std::string exp_report = "report.json", exp_confusion, exp_history;
  exp->add_option("--report", exp_report, "Report JSON path ('-' for stdout)");
  exp->add_option("--confusion", exp_confusion, "Confusion matrix CSV (largest n_tta, summed over runs)");
  exp->add_option("--history", exp_history, "Training history CSV");

  // viz
  auto* viz = app.add_subcommand("viz", "Visualize a convolution filter by gradient ascent");
  std::string viz_model, viz_out = "-";
  std::size_t viz_layer = 0;
  int viz_filter = 0, viz_steps = 200;
  std::uint64_t viz_seed = 0;
  viz->add_option("--model", viz_model, "Checkpoint path")->required();
  viz->add_option("--layer", viz_layer, "Convolution layer index");
  viz->add_option("--filter", viz_filter, "Filter index");
  viz->add_option("--steps", viz_steps, "Gradient ascent steps");
  viz->add_option("--seed", viz_seed, "Seed of the starting noise");
  viz->add_option("--out", viz_out, "CSV of n,i,q ('-' for stdout)");

  // xval
  auto* xval = app.add_subcommand("xval", "Stratified k-fold cross validation");
  ExperimentFlags xval_flags;
  xval_flags.add(xval);
  int xval_k = 5;
  std::string xval_report = "-";
  xval->add_option("-k,--folds", xval_k, "Number of folds");
  xval->add_option("--report", xval_report, "Report JSON path ('-' for stdout)");

  // count
  auto* count = app.add_subcommand("count", "Print the parameter count of a preset network");
  std::string count_preset = "wifi_complex";
  count->add_option("preset", count_preset, "wifi_complex | adsb_complex | wifi_real[:scale] | adsb_real[:scale]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      json m = json::object();
      if (gen_scale == "desk") m["train_per_device"] = 100;
      gen_flags.apply(m);
      DatasetGuard ds;
      check(rfp_dataset_generate(m.dump().c_str(), gen_threads, &ds.p));
      check(rfp_dataset_save(ds.p, gen_out.c_str()));
      LibString info;
      check(rfp_dataset_info(ds.p, &info.p));
      const json j = json::parse(info.str());
      std::printf("wrote %s: train %zu, val %zu, test %zu packets\n", gen_out.c_str(),
                  j["counts"]["train"].get<std::size_t>(), j["counts"]["val"].get<std::size_t>(),
                  j["counts"]["test"].get<std::size_t>());
    } else if (train->parsed()) {
      DatasetGuard ds;
      train_flags.load(ds);
      ModelGuard model;
      LibString history;
      check(rfp_train(train_flags.build().c_str(), ds.p, train_run, &model.p, &history.p));
      check(rfp_model_save(model.p, train_model.c_str()));
      write_file(train_history, history.str());
      std::printf("saved %s\n", train_model.c_str());
    } else if (eval->parsed()) {
      ModelGuard model;
      check(rfp_model_load(eval_model.c_str(), &model.p));
      DatasetGuard ds;
      if (!eval_data.empty()) check(rfp_dataset_load(eval_data.c_str(), &ds.p));
      const std::string cfg = eval_config.empty() ? std::string() : read_file(eval_config);
      LibString report, confusion;
      check(rfp_evaluate(model.p, cfg.empty() ? nullptr : cfg.c_str(), ds.p, eval_run, &report.p, &confusion.p));
      write_file(eval_report, report.str());
      write_file(eval_confusion, confusion.str());
      if (eval_report != "-") print_summary(report.str());
    } else if (exp->parsed()) {
      DatasetGuard ds;
      exp_flags.load(ds);
      LibString report, confusion, history;
      check(rfp_experiment_run(exp_flags.build().c_str(), ds.p, &report.p, &confusion.p, &history.p));
      write_file(exp_report, report.str());
      write_file(exp_confusion, confusion.str());
      write_file(exp_history, history.str());
      if (exp_report != "-") print_summary(report.str());
    } else if (viz->parsed()) {
      ModelGuard model;
      check(rfp_model_load(viz_model.c_str(), &model.p));
      std::size_t len = 0;
      check(rfp_visualize_filter(model.p, viz_layer, viz_filter, 0, viz_seed, nullptr, 0, &len));
      std::vector<float> iq(2 * len);
      check(rfp_visualize_filter(model.p, viz_layer, viz_filter, viz_steps, viz_seed, iq.data(), len, &len));
      std::ostringstream os;
      os.precision(9);
      os << "n,i,q\n";
      for (std::size_t i = 0; i < len; ++i) os << i << ',' << iq[2 * i] << ',' << iq[2 * i + 1] << '\n';
      write_file(viz_out, os.str());
    } else if (xval->parsed()) {
      DatasetGuard ds;
      xval_flags.load(ds);
      LibString report;
      check(rfp_cross_validate(xval_flags.build().c_str(), xval_k, ds.p, &report.p));
      write_file(xval_report, report.str());
    } else if (count->parsed()) {
      std::int64_t n = 0;
      check(rfp_count_parameters(count_preset.c_str(), &n));
      std::printf("%lld\n", static_cast<long long>(n));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rfp: %s\n", e.what());
    return 1;
  }
  return 0;
}
