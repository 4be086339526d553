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

#include "rfp/rfp.h"

#include <cstring>
#include <json.hpp>
#include <optional>
#include <string>

#include "rfp/harness.hpp"

struct rfp_dataset {
  rfp::harness::Dataset data;
};

struct rfp_model {
  rfp::nn::Network<float> net;
  std::string config_json;  // empty when unknown
  int run = 0;
};

namespace {

using json = nlohmann::json;
using rfp::harness::Dataset;
using rfp::harness::ExperimentConfig;

thread_local std::string g_last_error;

rfp_status fail(rfp_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
rfp_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const rfp::IoError& e) {
    return fail(RFP_ERR_IO, e.what());
  } catch (const rfp::FormatError& e) {
    return fail(RFP_ERR_FORMAT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(RFP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(RFP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(RFP_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(RFP_ERR_RUNTIME, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_string(char** out, const std::string& s) {
  if (out != nullptr) *out = dup_string(s);
}

rfp::harness::DatasetManifest parse_manifest(const char* text) {
  if (text == nullptr || std::strlen(text) == 0) return {};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed manifest: ") + e.what());
  }
  json base = json::parse(rfp::harness::manifest_to_json({}));
  base.erase("manifest_hash");
  base.merge_patch(j);
  return rfp::harness::manifest_from_json(base.dump());
}

rfp::harness::Split to_split(rfp_split s) {
  switch (s) {
    case RFP_SPLIT_TRAIN:
      return rfp::harness::Split::kTrain;
    case RFP_SPLIT_VAL:
      return rfp::harness::Split::kVal;
    case RFP_SPLIT_TEST:
      return rfp::harness::Split::kTest;
  }
  throw std::invalid_argument("unknown split");
}

rfp::nn::NetworkSpec preset_spec(const std::string& name) {
  const auto colon = name.find(':');
  const std::string base = name.substr(0, colon);
  const double scale = colon == std::string::npos ? 1.0 : std::stod(name.substr(colon + 1));
  if (base == "wifi_complex") return rfp::nn::wifi_complex();
  if (base == "adsb_complex") return rfp::nn::adsb_complex();
  if (base == "wifi_real") return rfp::nn::wifi_real(scale);
  if (base == "adsb_real") return rfp::nn::adsb_real(scale);
  throw std::invalid_argument("unknown preset '" + name + "'");
}

// Uses the caller's dataset or generates the config's one.
template <typename Fn>
auto with_dataset(const rfp_dataset* ds, const ExperimentConfig& cfg, Fn&& fn) {
  if (ds != nullptr) return fn(ds->data);
  const Dataset generated = rfp::harness::generate_dataset(cfg.dataset, cfg.threads);
  return fn(generated);
}

}  // namespace

extern "C" {

const char* rfp_version(void) { return "1.0.0"; }

const char* rfp_last_error(void) { return g_last_error.c_str(); }

void rfp_string_free(char* s) { std::free(s); }

rfp_status rfp_dataset_generate(const char* manifest_json, int threads, rfp_dataset** out) {
  return guarded([&] {
    if (out == nullptr) return fail(RFP_ERR_NULL_POINTER, "out is null");
    auto ds = std::make_unique<rfp_dataset>();
    ds->data = rfp::harness::generate_dataset(parse_manifest(manifest_json), threads);
    *out = ds.release();
    return RFP_OK;
  });
}

rfp_status rfp_dataset_save(const rfp_dataset* ds, const char* dir) {
  return guarded([&] {
    if (ds == nullptr || dir == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    rfp::harness::save_dataset(ds->data, dir);
    return RFP_OK;
  });
}

rfp_status rfp_dataset_load(const char* dir, rfp_dataset** out) {
  return guarded([&] {
    if (dir == nullptr || out == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    auto ds = std::make_unique<rfp_dataset>();
    ds->data = rfp::harness::load_dataset(dir);
    *out = ds.release();
    return RFP_OK;
  });
}

rfp_status rfp_dataset_info(const rfp_dataset* ds, char** json_out) {
  return guarded([&] {
    if (ds == nullptr || json_out == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    const Dataset& d = ds->data;
    json j = {{"manifest", json::parse(rfp::harness::manifest_to_json(d.manifest))},
              {"packet_length", d.manifest.preamble_spec().length()},
              {"counts", {{"train", d.train.size()}, {"val", d.val.size()}, {"test", d.test.size()}}},
              {"warnings", d.warnings}};
    set_string(json_out, j.dump(2));
    return RFP_OK;
  });
}

rfp_status rfp_dataset_split_size(const rfp_dataset* ds, rfp_split split, size_t* n_packets, size_t* packet_len) {
  return guarded([&] {
    if (ds == nullptr) return fail(RFP_ERR_NULL_POINTER, "dataset is null");
    const rfp::PacketSet& set = ds->data.split(to_split(split));
    if (n_packets != nullptr) *n_packets = set.size();
    if (packet_len != nullptr) *packet_len = ds->data.manifest.preamble_spec().length();
    return RFP_OK;
  });
}

rfp_status rfp_dataset_copy_split(const rfp_dataset* ds, rfp_split split, float* iq_out, int* labels_out) {
  return guarded([&] {
    if (ds == nullptr) return fail(RFP_ERR_NULL_POINTER, "dataset is null");
    const rfp::PacketSet& set = ds->data.split(to_split(split));
    if (iq_out != nullptr) std::memcpy(iq_out, set.samples.data(), set.samples.size() * sizeof(rfp::cfloat));
    if (labels_out != nullptr) std::copy(set.labels.begin(), set.labels.end(), labels_out);
    return RFP_OK;
  });
}

void rfp_dataset_free(rfp_dataset* ds) { delete ds; }

rfp_status rfp_experiment_run(const char* config_json, const rfp_dataset* ds, char** report_json,
                              char** confusion_csv, char** history_csv) {
  return guarded([&] {
    if (config_json == nullptr || report_json == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    const ExperimentConfig cfg = rfp::harness::config_from_json(config_json);
    const auto report = rfp::harness::run_experiment(cfg, ds != nullptr ? &ds->data : nullptr);
    set_string(report_json, rfp::harness::report_to_json(report));
    set_string(confusion_csv, rfp::harness::confusion_to_csv(report.results.back().confusion));
    set_string(history_csv, rfp::harness::history_to_csv(report.runs));
    return RFP_OK;
  });
}

rfp_status rfp_cross_validate(const char* config_json, int k, const rfp_dataset* ds, char** report_json) {
  return guarded([&] {
    if (config_json == nullptr || report_json == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    const ExperimentConfig cfg = rfp::harness::config_from_json(config_json);
    const auto report = rfp::harness::cross_validate(cfg, k, ds != nullptr ? &ds->data : nullptr);
    set_string(report_json, rfp::harness::cv_report_to_json(report));
    return RFP_OK;
  });
}

rfp_status rfp_train(const char* config_json, const rfp_dataset* ds, int run, rfp_model** out,
                     char** history_csv) {
  return guarded([&] {
    if (config_json == nullptr || out == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    if (run < 0) return fail(RFP_ERR_INVALID_ARGUMENT, "run must be >= 0");
    const ExperimentConfig cfg = rfp::harness::config_from_json(config_json);
    rfp::nn::Network<float> net(rfp::harness::network_for(cfg));
    const auto output =
        with_dataset(ds, cfg, [&](const Dataset& d) { return rfp::harness::run_single(cfg, d, run, &net); });
    set_string(history_csv, rfp::harness::history_to_csv({output.record}));
    *out = new rfp_model{std::move(net), rfp::harness::config_to_json(cfg), run};
    return RFP_OK;
  });
}

rfp_status rfp_evaluate(rfp_model* model, const char* config_json, const rfp_dataset* ds, int run,
                        char** report_json, char** confusion_csv) {
  return guarded([&] {
    if (model == nullptr || report_json == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    std::string text = config_json != nullptr ? config_json : model->config_json;
    if (text.empty()) return fail(RFP_ERR_INVALID_ARGUMENT, "no experiment config given or stored with the model");
    const ExperimentConfig cfg = rfp::harness::config_from_json(text);
    const int r = run >= 0 ? run : model->run;
    const auto ms = with_dataset(ds, cfg, [&](const Dataset& d) {
      return rfp::harness::evaluate_run(model->net, cfg, d, r);
    });
    json results = json::array();
    for (std::size_t i = 0; i < ms.size(); ++i) {
      results.push_back({{"n_tta", cfg.tta_list[i]}, {"accuracy", ms[i].accuracy}, {"confusion", ms[i].confusion}});
    }
    set_string(report_json, json{{"run", r}, {"results", results}}.dump(2));
    set_string(confusion_csv, rfp::harness::confusion_to_csv(ms.back().confusion));
    return RFP_OK;
  });
}

rfp_status rfp_model_save(const rfp_model* model, const char* path) {
  return guarded([&] {
    if (model == nullptr || path == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    rfp::nn::CheckpointInfo info;
    json extra = {{"run", model->run}};
    extra["config"] = model->config_json.empty() ? json(nullptr) : json::parse(model->config_json);
    info.extra_json = extra.dump();
    rfp::nn::save_checkpoint(path, model->net, info);
    return RFP_OK;
  });
}

rfp_status rfp_model_load(const char* path, rfp_model** out) {
  return guarded([&] {
    if (path == nullptr || out == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    rfp::nn::CheckpointInfo info;
    rfp::nn::Network<float> net = rfp::nn::load_checkpoint(path, &info);
    const json extra = json::parse(info.extra_json);
    std::string cfg;
    if (extra.contains("config") && !extra["config"].is_null()) cfg = extra["config"].dump();
    *out = new rfp_model{std::move(net), cfg, extra.value("run", 0)};
    return RFP_OK;
  });
}

rfp_status rfp_model_info(const rfp_model* model, char** json_out) {
  return guarded([&] {
    if (model == nullptr || json_out == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    json j = {{"spec", json::parse(rfp::nn::spec_to_json(model->net.spec()))},
              {"num_params", rfp::nn::count_parameters(model->net.spec())},
              {"num_classes", model->net.num_classes()},
              {"run", model->run}};
    j["config"] = model->config_json.empty() ? json(nullptr) : json::parse(model->config_json);
    set_string(json_out, j.dump(2));
    return RFP_OK;
  });
}

void rfp_model_free(rfp_model* model) { delete model; }

rfp_status rfp_predict(rfp_model* model, const float* iq, size_t n_packets, size_t packet_len, double* probs_out,
                       size_t* n_classes_out) {
  return guarded([&] {
    if (model == nullptr || (iq == nullptr && n_packets > 0)) return fail(RFP_ERR_NULL_POINTER, "null argument");
    if (packet_len != static_cast<size_t>(model->net.spec().input_len)) {
      return fail(RFP_ERR_INVALID_ARGUMENT, "packet length does not match the network input");
    }
    const auto* samples = reinterpret_cast<const rfp::cfloat*>(iq);
    const auto probs =
        model->net.predict_proba(std::span<const rfp::cfloat>(samples, n_packets * packet_len), static_cast<int>(n_packets));
    if (probs_out != nullptr) std::copy(probs.begin(), probs.end(), probs_out);
    if (n_classes_out != nullptr) *n_classes_out = static_cast<size_t>(model->net.num_classes());
    return RFP_OK;
  });
}

rfp_status rfp_visualize_filter(rfp_model* model, size_t layer_index, int filter_index, int steps, uint64_t seed,
                                float* iq_out, size_t capacity, size_t* len_out) {
  return guarded([&] {
    if (model == nullptr) return fail(RFP_ERR_NULL_POINTER, "model is null");
    const auto x = rfp::nn::visualize_filter(model->net, layer_index, filter_index, steps, seed);
    if (len_out != nullptr) *len_out = x.size();
    if (iq_out != nullptr) {
      const std::size_t n = std::min(capacity, x.size());
      for (std::size_t i = 0; i < n; ++i) {
        iq_out[2 * i] = static_cast<float>(x[i].real());
        iq_out[2 * i + 1] = static_cast<float>(x[i].imag());
      }
    }
    return RFP_OK;
  });
}

rfp_status rfp_count_parameters(const char* preset, int64_t* out) {
  return guarded([&] {
    if (preset == nullptr || out == nullptr) return fail(RFP_ERR_NULL_POINTER, "null argument");
    *out = rfp::nn::count_parameters(preset_spec(preset));
    return RFP_OK;
  });
}

}  // extern "C"
