// Copyright (c) 2026 The bcauth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BCAUTH_APP_CONFIG_H_
#define BCAUTH_APP_CONFIG_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bcauth/bcsr/features.h"
#include "bcauth/bcsr/network.h"
#include "bcauth/bcsr/train.h"
#include "bcauth/init/initialize.h"
#include "bcauth/tcs/tcs.h"
#include "json.hpp"

namespace bcauth::app {

enum class Stage2Mode { kVerify, kIdentify };
const char* Stage2ModeName(Stage2Mode m);
Stage2Mode ParseStage2Mode(const std::string& name);

struct Stage2Config {
  Stage2Mode mode = Stage2Mode::kVerify;
  bcsr::LayerTag layer = bcsr::LayerTag::kLayer1;
  // Cosine threshold; unset uses the one calibrated on the dev split at
  // training time and stored with the model.
  std::optional<double> threshold;
  double identify_min_score = 0.0; // softmax floor in identification mode
  bool machine_detector = true;    // reject when the detector says machine
};

struct PathsConfig {
  std::filesystem::path model = "model/bcsr.ckpt";
  std::filesystem::path template_store = "templates.json";
  std::filesystem::path detector;  // empty: <model>.detector.json
  std::vector<std::filesystem::path> corpus_roots;

  std::filesystem::path DetectorPath() const;
};

struct PipelineConfig {
  init::InitConfig init;
  tcs::TcsConfig tcs;
  bcsr::FeatureConfig features;
  bcsr::NetworkSpec network;  // num_speakers and ids are set by training
  bcsr::TrainConfig train;
  int pretrain_epochs = 0;    // 0 disables the clean-AC pretraining pass
  double dev_fraction = 0.25; // held-out utterances per training speaker
  Stage2Config stage2;
  PathsConfig paths;

  void Validate() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

// Relative paths in the file are taken relative to its directory. The
// BCAUTH_TEMPLATE_STORE and BCAUTH_MODEL environment variables override the
// corresponding paths.
PipelineConfig LoadPipelineConfig(const std::filesystem::path& path);
// Defaults plus environment overrides, for runs without a config file.
PipelineConfig DefaultPipelineConfig();
void SavePipelineConfig(const std::filesystem::path& path, const PipelineConfig& c);

}  // namespace bcauth::app

#endif  // BCAUTH_APP_CONFIG_H_
