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


// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "rfp/rfp.h"

namespace {

const char* kManifest =
    R"({"n_devices": 3, "train_per_device": 4, "val_per_device": 1, "test_per_device": 2, "master_seed": 3})";

const char* kConfig = R"({
  "dataset": {"n_devices": 3, "train_per_device": 4, "val_per_device": 1, "test_per_device": 2, "master_seed": 3},
  "n_train_days": 2, "n_runs": 1, "train": {"epochs": 1, "batch_size": 6},
  "augmentation": {"kind": "cfo", "assignment": "orthogonal", "multiplier": 2}, "tta_list": [0, 2]
})";

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  rfp_string_free(s);
  return out;
}

TEST(CApi, VersionAndCounts) {
  EXPECT_STRNE(rfp_version(), "");
  int64_t n = 0;
  ASSERT_EQ(rfp_count_parameters("wifi_complex", &n), RFP_OK);
  EXPECT_EQ(n, 262719);
  ASSERT_EQ(rfp_count_parameters("adsb_complex", &n), RFP_OK);
  EXPECT_EQ(n, 128400);
  ASSERT_EQ(rfp_count_parameters("adsb_real:2", &n), RFP_OK);
  EXPECT_EQ(n, 246600);
  EXPECT_EQ(rfp_count_parameters("nonsense", &n), RFP_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::strlen(rfp_last_error()), 0u);
  EXPECT_EQ(rfp_count_parameters(nullptr, &n), RFP_ERR_NULL_POINTER);
}

TEST(CApi, DatasetLifecycle) {
  rfp_dataset* ds = nullptr;
  ASSERT_EQ(rfp_dataset_generate(kManifest, 1, &ds), RFP_OK) << rfp_last_error();
  size_t n = 0, len = 0;
  ASSERT_EQ(rfp_dataset_split_size(ds, RFP_SPLIT_TEST, &n, &len), RFP_OK);
  EXPECT_EQ(n, 6u);
  EXPECT_EQ(len, 3200u);
  std::vector<float> iq(2 * n * len);
  std::vector<int> labels(n);
  ASSERT_EQ(rfp_dataset_copy_split(ds, RFP_SPLIT_TEST, iq.data(), labels.data()), RFP_OK);
  EXPECT_EQ(labels, (std::vector<int>{0, 0, 1, 1, 2, 2}));

  const auto dir = std::filesystem::temp_directory_path() / "rfp_capi_ds";
  std::filesystem::remove_all(dir);
  ASSERT_EQ(rfp_dataset_save(ds, dir.c_str()), RFP_OK) << rfp_last_error();
  rfp_dataset* back = nullptr;
  ASSERT_EQ(rfp_dataset_load(dir.c_str(), &back), RFP_OK) << rfp_last_error();
  std::vector<float> iq2(iq.size());
  ASSERT_EQ(rfp_dataset_copy_split(back, RFP_SPLIT_TEST, iq2.data(), nullptr), RFP_OK);
  EXPECT_EQ(iq, iq2);
  char* info = nullptr;
  ASSERT_EQ(rfp_dataset_info(back, &info), RFP_OK);
  EXPECT_NE(take(info).find("manifest"), std::string::npos);

  rfp_dataset* missing = nullptr;
  EXPECT_EQ(rfp_dataset_load((dir / "nope").c_str(), &missing), RFP_ERR_IO);
  EXPECT_EQ(missing, nullptr);
  EXPECT_EQ(rfp_dataset_generate("{bad", 1, &missing), RFP_ERR_INVALID_ARGUMENT);
  rfp_dataset_free(back);
  rfp_dataset_free(ds);
  rfp_dataset_free(nullptr);
  std::filesystem::remove_all(dir);
}

TEST(CApi, ExperimentTrainEvaluatePredict) {
  rfp_dataset* ds = nullptr;
  ASSERT_EQ(rfp_dataset_generate(kManifest, 1, &ds), RFP_OK);
  char *report = nullptr, *conf = nullptr, *hist = nullptr;
  ASSERT_EQ(rfp_experiment_run(kConfig, ds, &report, &conf, &hist), RFP_OK) << rfp_last_error();
  EXPECT_NE(take(report).find("results"), std::string::npos);
  EXPECT_FALSE(take(conf).empty());
  EXPECT_NE(take(hist).find("epoch"), std::string::npos);

  rfp_model* model = nullptr;
  ASSERT_EQ(rfp_train(kConfig, ds, 0, &model, nullptr), RFP_OK) << rfp_last_error();
  const auto path = (std::filesystem::temp_directory_path() / "rfp_capi_model.bin").string();
  ASSERT_EQ(rfp_model_save(model, path.c_str()), RFP_OK);
  rfp_model* loaded = nullptr;
  ASSERT_EQ(rfp_model_load(path.c_str(), &loaded), RFP_OK) << rfp_last_error();

  char* r1 = nullptr;
  char* r2 = nullptr;
  ASSERT_EQ(rfp_evaluate(model, nullptr, ds, -1, &r1, nullptr), RFP_OK) << rfp_last_error();
  ASSERT_EQ(rfp_evaluate(loaded, nullptr, ds, -1, &r2, nullptr), RFP_OK) << rfp_last_error();
  EXPECT_EQ(take(r1), take(r2));

  size_t n = 0, len = 0, classes = 0;
  rfp_dataset_split_size(ds, RFP_SPLIT_TEST, &n, &len);
  std::vector<float> iq(2 * n * len);
  rfp_dataset_copy_split(ds, RFP_SPLIT_TEST, iq.data(), nullptr);
  std::vector<double> probs(n * 3);
  ASSERT_EQ(rfp_predict(loaded, iq.data(), n, len, probs.data(), &classes), RFP_OK) << rfp_last_error();
  EXPECT_EQ(classes, 3u);
  for (size_t i = 0; i < n; ++i) EXPECT_NEAR(probs[3 * i] + probs[3 * i + 1] + probs[3 * i + 2], 1.0, 1e-6);
  EXPECT_EQ(rfp_predict(loaded, iq.data(), n, 17, probs.data(), &classes), RFP_ERR_INVALID_ARGUMENT);

  std::vector<float> filt(2 * 400);
  size_t flen = 0;
  ASSERT_EQ(rfp_visualize_filter(loaded, 0, 1, 5, 0, filt.data(), 400, &flen), RFP_OK) << rfp_last_error();
  EXPECT_EQ(flen, 200u);
  EXPECT_EQ(rfp_visualize_filter(loaded, 1, 0, 5, 0, filt.data(), 400, &flen), RFP_ERR_INVALID_ARGUMENT);

  char* info = nullptr;
  ASSERT_EQ(rfp_model_info(loaded, &info), RFP_OK);
  // Three output classes: 262719 - 16 * 101.
  EXPECT_NE(take(info).find("\"num_params\": 261103"), std::string::npos);

  std::FILE* f = std::fopen(path.c_str(), "r+b");
  ASSERT_NE(f, nullptr);
  std::fwrite("BADMAGIC", 1, 8, f);
  std::fclose(f);
  rfp_model* bad = nullptr;
  EXPECT_EQ(rfp_model_load(path.c_str(), &bad), RFP_ERR_FORMAT);
  std::remove(path.c_str());

  rfp_model_free(loaded);
  rfp_model_free(model);
  rfp_dataset_free(ds);
}

TEST(CApi, NullArguments) {
  EXPECT_EQ(rfp_dataset_generate(nullptr, 1, nullptr), RFP_ERR_NULL_POINTER);
  EXPECT_EQ(rfp_experiment_run(kConfig, nullptr, nullptr, nullptr, nullptr), RFP_ERR_NULL_POINTER);
  size_t n = 0;
  EXPECT_EQ(rfp_dataset_split_size(nullptr, RFP_SPLIT_TRAIN, &n, &n), RFP_ERR_NULL_POINTER);
}

}  // namespace
