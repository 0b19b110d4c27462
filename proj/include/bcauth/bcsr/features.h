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

#ifndef BCAUTH_BCSR_FEATURES_H_
#define BCAUTH_BCSR_FEATURES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcauth/signal/spectrogram.h"
#include "bcauth/signal/waveform.h"
#include "bcauth/synth/scene.h"
#include "json.hpp"

namespace bcauth::bcsr {

struct FeatureConfig {
  int sample_rate = 8000;
  double seconds = 8.0;
  signal::CqtParams cqt;  // 48 bins/octave, C1 to 2 kHz, 10 ms hop

  void Validate() const;
  std::size_t segment_samples() const;
};

void to_json(nlohmann::json& j, const FeatureConfig& c);
void from_json(const nlohmann::json& j, FeatureConfig& c);

// Log-compressed CQT of a fixed-length BC segment, bin-major
// (values[bin * frames + frame]). Each feature is divided by its mean CQT
// magnitude before log1p, so overall gain drops out; silence maps to zeros.
struct BcFeature {
  int bins = 0;
  int frames = 0;
  std::vector<float> values;
  synth::Condition condition = synth::Condition::kStill;
  std::optional<std::string> speaker;

  float at(int bin, int frame) const {
    return values[static_cast<std::size_t>(bin) * frames + frame];
  }
};

class FeatureExtractor {
 public:
  explicit FeatureExtractor(const FeatureConfig& config = {});

  const FeatureConfig& config() const { return config_; }
  int bins() const;
  int frames() const;
  const std::vector<double>& bin_frequencies() const { return freqs_; }

  // bc must be at least config().seconds long at config().sample_rate;
  // longer input is center-cropped.
  BcFeature Extract(const signal::Waveform& bc,
                    synth::Condition condition = synth::Condition::kStill,
                    std::optional<std::string> speaker = std::nullopt) const;

 private:
  FeatureConfig config_;
  signal::ConstantQ cqt_;
  std::vector<double> freqs_;
};

struct AugmentConfig {
  double flip_probability = 0.5;
  bool crop = true;
  double min_crop_fraction = 0.8;  // kept window, as a fraction of frames
  bool translate = true;
};

// Time-axis only: optional reversal, zeroing frames outside a random window,
// then a random circular shift. Deterministic in (f, seed).
BcFeature Augment(const BcFeature& f, std::uint64_t seed,
                  const AugmentConfig& config = {});

}  // namespace bcauth::bcsr

#endif  // BCAUTH_BCSR_FEATURES_H_
