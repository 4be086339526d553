/*
 * Copyright 2026 The rfprint Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the rfprint library.
 *
 * Every function returns an rfp_status. On failure the message is available
 * from rfp_last_error() on the calling thread until the next call. Strings
 * returned through char** are heap allocated and must be released with
 * rfp_string_free(). Configuration is passed as JSON text; see README.md.
 */

#ifndef RFP_RFP_H_
#define RFP_RFP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RFP_API __declspec(dllexport)
#else
#define RFP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rfp_status {
  RFP_OK = 0,
  RFP_ERR_INVALID_ARGUMENT = 1,
  RFP_ERR_IO = 2,
  RFP_ERR_FORMAT = 3,
  RFP_ERR_RUNTIME = 4,
  RFP_ERR_NULL_POINTER = 5,
} rfp_status;

typedef enum rfp_split {
  RFP_SPLIT_TRAIN = 0,
  RFP_SPLIT_VAL = 1,
  RFP_SPLIT_TEST = 2,
} rfp_split;

typedef struct rfp_dataset rfp_dataset;
typedef struct rfp_model rfp_model;

RFP_API const char* rfp_version(void);
RFP_API const char* rfp_last_error(void);
RFP_API void rfp_string_free(char* s);

/* Datasets. manifest_json may be NULL or "{}" for the default manifest. */
RFP_API rfp_status rfp_dataset_generate(const char* manifest_json, int threads, rfp_dataset** out);
RFP_API rfp_status rfp_dataset_save(const rfp_dataset* ds, const char* dir);
RFP_API rfp_status rfp_dataset_load(const char* dir, rfp_dataset** out);
/* Manifest, split sizes and load warnings as JSON. */
RFP_API rfp_status rfp_dataset_info(const rfp_dataset* ds, char** json_out);
RFP_API rfp_status rfp_dataset_split_size(const rfp_dataset* ds, rfp_split split, size_t* n_packets,
                                          size_t* packet_len);
/* iq_out holds 2 * n_packets * packet_len floats (I, Q interleaved);
 * labels_out holds n_packets ints. Either may be NULL. */
RFP_API rfp_status rfp_dataset_copy_split(const rfp_dataset* ds, rfp_split split, float* iq_out, int* labels_out);
RFP_API void rfp_dataset_free(rfp_dataset* ds);

/* Experiments. ds may be NULL, in which case the dataset is generated from
 * the config's manifest. Output pointers other than report_json may be
 * NULL. */
RFP_API rfp_status rfp_experiment_run(const char* config_json, const rfp_dataset* ds, char** report_json,
                                      char** confusion_csv, char** history_csv);
RFP_API rfp_status rfp_cross_validate(const char* config_json, int k, const rfp_dataset* ds, char** report_json);

/* Trains the network of one experiment run. */
RFP_API rfp_status rfp_train(const char* config_json, const rfp_dataset* ds, int run, rfp_model** out,
                             char** history_csv);
/* Evaluates on the test day of the given run. config_json may be NULL to
 * reuse the configuration stored with the model. */
RFP_API rfp_status rfp_evaluate(rfp_model* model, const char* config_json, const rfp_dataset* ds, int run,
                                char** report_json, char** confusion_csv);

RFP_API rfp_status rfp_model_save(const rfp_model* model, const char* path);
RFP_API rfp_status rfp_model_load(const char* path, rfp_model** out);
/* Network spec, parameter count, stored config and run as JSON. */
RFP_API rfp_status rfp_model_info(const rfp_model* model, char** json_out);
RFP_API void rfp_model_free(rfp_model* model);

/* Softmax posteriors for raw packets; probs_out holds n_packets * classes. */
RFP_API rfp_status rfp_predict(rfp_model* model, const float* iq, size_t n_packets, size_t packet_len,
                               double* probs_out, size_t* n_classes_out);

/* Writes up to capacity complex samples (2 * capacity floats) of the
 * filter's preferred input; len_out receives the receptive-field length. */
RFP_API rfp_status rfp_visualize_filter(rfp_model* model, size_t layer_index, int filter_index, int steps,
                                        uint64_t seed, float* iq_out, size_t capacity, size_t* len_out);

/* Preset name: wifi_complex, adsb_complex, wifi_real[:scale], adsb_real[:scale]. */
RFP_API rfp_status rfp_count_parameters(const char* preset, int64_t* out);

#ifdef __cplusplus
}
#endif

#endif /* RFP_RFP_H_ */
