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

#include "bcauth/bcsr/speaker.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>

#include "bcauth/error.h"

namespace bcauth::bcsr {

void to_json(nlohmann::json& j, const SpeakerEmbedding& e) {
  j = {{"layer_tag", LayerTagName(e.tag)}, {"vector", e.vector}};
}

void from_json(const nlohmann::json& j, SpeakerEmbedding& e) {
  e.tag = ParseLayerTag(j.at("layer_tag").get<std::string>());
  e.vector = j.at("vector").get<std::vector<double>>();
}

int LayerWidth(const NetworkSpec& spec, LayerTag tag) {
  return tag == LayerTag::kLayer1 ? spec.embed_dim : spec.num_speakers;
}

SpeakerEmbedding Embed(const Network<float>& net, const BcFeature& f, LayerTag tag) {
  const NetworkSpec& s = net.spec();
  Require(f.bins == s.in_bins && f.frames == s.in_frames,
          "embed: feature shape does not match the network input");
  ForwardOutputs out = net.Forward(f.values.data());
  SpeakerEmbedding e;
  e.tag = tag;
  switch (tag) {
    case LayerTag::kLayer1: e.vector = std::move(out.layer1); break;
    case LayerTag::kLayer2: e.vector = std::move(out.logits); break;
    case LayerTag::kLayer3: e.vector = std::move(out.softmax); break;
  }
  Require(static_cast<int>(e.vector.size()) == LayerWidth(s, tag),
          "embed: layer width mismatch");
  for (double v : e.vector) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kDegenerate, "embed: non-finite output");
  }
  return e;
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size(), "cosine: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

void to_json(nlohmann::json& j, const Template& t) {
  j = {{"user_id", t.user_id},
       {"layer_tag", LayerTagName(t.mean.tag)},
       {"vector", t.mean.vector},
       {"enrollment_seconds", t.enrollment_seconds},
       {"created_at", t.created_at}};
}

void from_json(const nlohmann::json& j, Template& t) {
  t.user_id = j.at("user_id").get<std::string>();
  t.mean.tag = ParseLayerTag(j.at("layer_tag").get<std::string>());
  t.mean.vector = j.at("vector").get<std::vector<double>>();
  t.enrollment_seconds = j.value("enrollment_seconds", 0.0);
  t.created_at = j.value("created_at", std::string());
}

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Template Enroll(const std::string& user_id,
                const std::vector<SpeakerEmbedding>& embeddings,
                double total_seconds, double min_seconds, std::string created_at) {
  Require(!user_id.empty(), "enroll: empty user id");
  Require(!embeddings.empty(), "enroll: no enrollment clips");
  Require(total_seconds + 1e-9 >= min_seconds,
          "enroll: need at least " + std::to_string(min_seconds) + " s of BC speech");
  Template t;
  t.user_id = user_id;
  t.enrollment_seconds = total_seconds;
  t.created_at = created_at.empty() ? UtcTimestamp() : std::move(created_at);
  t.mean.tag = embeddings.front().tag;
  t.mean.vector.assign(embeddings.front().vector.size(), 0.0);
  for (const SpeakerEmbedding& e : embeddings) {
    Require(e.tag == t.mean.tag, "enroll: embeddings from different layers");
    Require(e.vector.size() == t.mean.vector.size(), "enroll: embedding widths differ");
    for (std::size_t i = 0; i < e.vector.size(); ++i) t.mean.vector[i] += e.vector[i];
  }
  for (double& v : t.mean.vector) v /= static_cast<double>(embeddings.size());
  return t;
}

Template EnrollClips(const std::string& user_id,
                     const std::vector<signal::Waveform>& preprocessed_bc,
                     const FeatureExtractor& extractor,
                     const Network<float>& net, LayerTag tag) {
  std::vector<SpeakerEmbedding> embeddings;
  double seconds = 0.0;
  for (const signal::Waveform& clip : preprocessed_bc) {
    embeddings.push_back(Embed(net, extractor.Extract(clip), tag));
    seconds += clip.duration_seconds();
  }
  return Enroll(user_id, embeddings, seconds, extractor.config().seconds);
}

Verification Verify(const SpeakerEmbedding& probe, const Template& tmpl,
                    double threshold) {
  Require(probe.tag == tmpl.mean.tag,
          std::string("verify: probe is ") + LayerTagName(probe.tag) +
              " but the template is " + LayerTagName(tmpl.mean.tag));
  Verification v;
  v.score = CosineSimilarity(probe.vector, tmpl.mean.vector);
  v.threshold = threshold;
  v.accepted = v.score >= threshold;
  return v;
}

Identification Identify(const Network<float>& net, const BcFeature& f) {
  const SpeakerEmbedding e = Embed(net, f, LayerTag::kLayer3);
  Identification id;
  id.scores = e.vector;
  id.index = static_cast<int>(std::max_element(id.scores.begin(), id.scores.end()) -
                              id.scores.begin());
  const auto& ids = net.spec().speaker_ids;
  id.speaker_id = id.index < static_cast<int>(ids.size())
                      ? ids[id.index]
                      : "speaker" + std::to_string(id.index);
  return id;
}

}  // namespace bcauth::bcsr
