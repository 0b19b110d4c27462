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

#include "bcauth/bcsr/train.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "bcauth/error.h"
#include "bcauth/synth/vocal.h"

namespace bcauth::bcsr {

void TrainConfig::Validate() const {
  Require(learning_rate > 0.0, "train: learning rate must be positive");
  Require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
          "train: Adam decay factors must be in [0, 1)");
  Require(epsilon > 0.0, "train: epsilon must be positive");
  Require(epochs >= 1, "train: need at least one epoch");
  Require(batch_size >= 1, "train: batch size must be >= 1");
  Require(lambda >= 0.0, "train: lambda must be >= 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"optimizer", "adam"},
       {"learning_rate", c.learning_rate},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"epsilon", c.epsilon},
       {"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"lambda", c.lambda},
       {"augment", c.augment},
       {"flip_probability", c.augment_config.flip_probability},
       {"min_crop_fraction", c.augment_config.min_crop_fraction},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  const TrainConfig d;
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.epsilon = j.value("epsilon", d.epsilon);
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.lambda = j.value("lambda", d.lambda);
  c.augment = j.value("augment", d.augment);
  c.augment_config.flip_probability =
      j.value("flip_probability", d.augment_config.flip_probability);
  c.augment_config.min_crop_fraction =
      j.value("min_crop_fraction", d.augment_config.min_crop_fraction);
  c.seed = j.value("seed", d.seed);
}

void to_json(nlohmann::json& j, const EpochLog& e) {
  j = {{"epoch", e.epoch},
       {"speaker_loss", e.speaker_loss},
       {"condition_loss", e.condition_loss},
       {"speaker_accuracy", e.speaker_accuracy},
       {"condition_accuracy", e.condition_accuracy}};
}

void to_json(nlohmann::json& j, const TrainLog& l) {
  j = {{"first_batch_loss", l.first_batch_loss},
       {"first_batch_size", l.first_batch.size()},
       {"epochs", l.epochs}};
}

std::vector<std::string> SpeakerLabels(const std::vector<BcFeature>& data) {
  std::set<std::string> ids;
  for (const BcFeature& f : data) {
    Require(f.speaker.has_value(), "train: every feature needs a speaker label");
    ids.insert(*f.speaker);
  }
  return {ids.begin(), ids.end()};
}

std::vector<int> EpochOrder(int n, std::uint64_t seed, int epoch) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(synth::DeriveSeed(seed, 100 + static_cast<std::uint64_t>(epoch)));
  // Fisher-Yates with explicit draws; std::shuffle is implementation defined.
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng() % static_cast<std::uint64_t>(i + 1)]);
  }
  return order;
}

TrainResult Train(const std::vector<BcFeature>& data, NetworkSpec arch,
                  const TrainConfig& config, const Network<float>* warm_start,
                  const EpochCallback& on_epoch) {
  config.Validate();
  Require(!data.empty(), "train: empty training set");
  arch.speaker_ids = SpeakerLabels(data);
  arch.num_speakers = static_cast<int>(arch.speaker_ids.size());
  Require(arch.num_speakers >= 2, "train: need at least 2 speakers");
  arch.lambda = config.lambda;
  arch.in_bins = data.front().bins;
  arch.in_frames = data.front().frames;
  std::map<std::string, int> label;
  for (int i = 0; i < arch.num_speakers; ++i) label[arch.speaker_ids[i]] = i;
  for (const BcFeature& f : data) {
    Require(f.bins == arch.in_bins && f.frames == arch.in_frames,
            "train: features differ in shape");
  }

  TrainResult r{Network<float>(arch), {}};
  Network<float>& net = r.net;
  net.Init(synth::DeriveSeed(config.seed, 1));
  if (warm_start) {
    Require(warm_start->params().size() == net.params().size(),
            "train: warm-start network has a different architecture");
    for (std::size_t i = 0; i < net.params().size(); ++i) {
      auto& p = net.params()[i];
      const auto& q = warm_start->params()[i];
      if (p.group == ParamGroup::kSpeaker) continue;
      Require(p.shape == q.shape, "train: warm-start shape mismatch at " + p.name);
      p.data = q.data;
    }
  }

  const int n = static_cast<int>(data.size());
  const std::size_t in_size = net.input_size();
  std::vector<std::vector<float>> m = net.ZeroGrads(), v = net.ZeroGrads();
  std::vector<std::vector<float>> grads;
  std::vector<float> inputs;
  std::vector<int> spk, cond;
  const LossWeights weights{1.0, config.lambda, true};
  long step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<int> order = EpochOrder(n, config.seed, epoch);
    EpochLog log;
    log.epoch = epoch;
    int seen = 0, spk_ok = 0, cond_ok = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int b = std::min(config.batch_size, n - start);
      inputs.resize(in_size * b);
      spk.resize(b);
      cond.resize(b);
      for (int i = 0; i < b; ++i) {
        const int idx = order[start + i];
        const BcFeature& f = data[idx];
        const std::vector<float>& src =
            config.augment
                ? Augment(f,
                          synth::DeriveSeed(config.seed,
                                            (static_cast<std::uint64_t>(epoch) << 32) + idx),
                          config.augment_config)
                      .values
                : f.values;
        std::copy(src.begin(), src.end(), inputs.begin() + i * in_size);
        spk[i] = label.at(*f.speaker);
        cond[i] = static_cast<int>(f.condition);
      }
      const LossValue lv = net.ForwardBackward(inputs.data(), b, spk.data(), cond.data(),
                                               weights, &grads);
      if (epoch == 1 && start == 0) {
        r.log.first_batch.assign(order.begin(), order.begin() + b);
        r.log.first_batch_loss = lv.speaker;
      }
      log.speaker_loss += lv.speaker * b;
      log.condition_loss += lv.condition * b;
      spk_ok += lv.speaker_correct;
      cond_ok += lv.condition_correct;
      seen += b;

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < grads.size(); ++p) {
        std::vector<float>& w = net.params()[p].data;
        for (std::size_t k = 0; k < w.size(); ++k) {
          const double g = grads[p][k];
          m[p][k] = static_cast<float>(config.beta1 * m[p][k] + (1.0 - config.beta1) * g);
          v[p][k] = static_cast<float>(config.beta2 * v[p][k] + (1.0 - config.beta2) * g * g);
          w[k] -= static_cast<float>(config.learning_rate * (m[p][k] / c1) /
                                     (std::sqrt(v[p][k] / c2) + config.epsilon));
        }
      }
    }
    log.speaker_loss /= seen;
    log.condition_loss /= seen;
    log.speaker_accuracy = static_cast<double>(spk_ok) / seen;
    log.condition_accuracy = static_cast<double>(cond_ok) / seen;
    r.log.epochs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return r;
}

}  // namespace bcauth::bcsr
