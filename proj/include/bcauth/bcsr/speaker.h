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

#ifndef BCAUTH_BCSR_SPEAKER_H_
#define BCAUTH_BCSR_SPEAKER_H_

#include <span>
#include <string>
#include <vector>

#include "bcauth/bcsr/features.h"
#include "bcauth/bcsr/network.h"
#include "json.hpp"

namespace bcauth::bcsr {

struct SpeakerEmbedding {
  std::vector<double> vector;
  LayerTag tag = LayerTag::kLayer1;
};

void to_json(nlohmann::json& j, const SpeakerEmbedding& e);
void from_json(const nlohmann::json& j, SpeakerEmbedding& e);

// Width of the tagged layer for a given network.
int LayerWidth(const NetworkSpec& spec, LayerTag tag);

SpeakerEmbedding Embed(const Network<float>& net, const BcFeature& f, LayerTag tag);

// 0 when either vector is all zeros.
double CosineSimilarity(std::span<const double> a, std::span<const double> b);

struct Template {
  std::string user_id;
  SpeakerEmbedding mean;
  double enrollment_seconds = 0.0;
  std::string created_at;  // ISO-8601 UTC
};

void to_json(nlohmann::json& j, const Template& t);
void from_json(const nlohmann::json& j, Template& t);

// Enrollment presets, in seconds of BC speech.
inline constexpr double kEnrollmentPresets[] = {8.0, 24.0, 40.0};

// Mean of the per-clip embeddings. total_seconds must be at least one
// feature segment; all embeddings must share a tag. created_at empty means
// the current time.
Template Enroll(const std::string& user_id,
                const std::vector<SpeakerEmbedding>& embeddings,
                double total_seconds, double min_seconds = 8.0,
                std::string created_at = "");

// One embedding per clip; every clip must cover a feature segment.
Template EnrollClips(const std::string& user_id,
                     const std::vector<signal::Waveform>& preprocessed_bc,
                     const FeatureExtractor& extractor,
                     const Network<float>& net, LayerTag tag);

struct Verification {
  double score = 0.0;
  double threshold = 0.0;
  bool accepted = false;  // score >= threshold
};

Verification Verify(const SpeakerEmbedding& probe, const Template& tmpl,
                    double threshold);

struct Identification {
  std::string speaker_id;
  int index = 0;
  std::vector<double> scores;  // speaker-head softmax
};

Identification Identify(const Network<float>& net, const BcFeature& f);

std::string UtcTimestamp();

}  // namespace bcauth::bcsr

#endif  // BCAUTH_BCSR_SPEAKER_H_
