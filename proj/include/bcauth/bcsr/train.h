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

#ifndef BCAUTH_BCSR_TRAIN_H_
#define BCAUTH_BCSR_TRAIN_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bcauth/bcsr/features.h"
#include "bcauth/bcsr/network.h"
#include "json.hpp"

namespace bcauth::bcsr {

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 60;
  int batch_size = 64;
  double lambda = 0.1;
  bool augment = true;
  AugmentConfig augment_config;
  std::uint64_t seed = 1;

  void Validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct EpochLog {
  int epoch = 0;
  double speaker_loss = 0.0;    // mean over batches, sample weighted
  double condition_loss = 0.0;
  double speaker_accuracy = 0.0;
  double condition_accuracy = 0.0;
};

struct TrainLog {
  std::vector<int> first_batch;     // sample indices of epoch 1, batch 1
  double first_batch_loss = 0.0;    // L_s of the initialized network on it
  std::vector<EpochLog> epochs;
};

void to_json(nlohmann::json& j, const EpochLog& e);
void to_json(nlohmann::json& j, const TrainLog& l);

// Sorted distinct speaker ids; every feature must carry one.
std::vector<std::string> SpeakerLabels(const std::vector<BcFeature>& data);

// Order in which an epoch visits the data (seeded shuffle).
std::vector<int> EpochOrder(int n, std::uint64_t seed, int epoch);

struct TrainResult {
  Network<float> net;
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Adam on L_s - lambda L_v. The architecture's speaker width and ids are
// taken from the data. With warm_start, every parameter except the speaker
// head is copied from it (the speaker head is freshly initialized), and all
// layers are trained.
TrainResult Train(const std::vector<BcFeature>& data, NetworkSpec arch,
                  const TrainConfig& config, const Network<float>* warm_start = nullptr,
                  const EpochCallback& on_epoch = {});

}  // namespace bcauth::bcsr

#endif  // BCAUTH_BCSR_TRAIN_H_
