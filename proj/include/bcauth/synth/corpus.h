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

#ifndef BCAUTH_SYNTH_CORPUS_H_
#define BCAUTH_SYNTH_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bcauth/synth/scene.h"
#include "bcauth/synth/vocal.h"
#include "json.hpp"

namespace bcauth::synth {

// One weighted component of a scene mix. The delay is drawn uniformly from
// [delay_min, delay_max]; scene.delay_samples is ignored. For
// crossdomain_machine with an empty device_profile the profiles rotate.
struct SceneTemplate {
  double weight = 1.0;
  SceneSpec scene;
  double duration_s = 8.0;
  int delay_min = 0;
  int delay_max = 0;
};

using SceneMix = std::vector<SceneTemplate>;

SceneMix GenuineOnlyMix(double duration_s = 8.0);
SceneMix ParseSceneMix(const nlohmann::json& j);
nlohmann::json SceneMixToJson(const SceneMix& mix);

struct CorpusEntry {
  std::string pair_id;
  std::string speaker_id;
  int speaker_index = 0;
  int utterance_index = 0;
  SceneSpec scene;
  double duration_s = 8.0;
  std::uint64_t seed = 0;
  std::string ac_path;  // relative to the corpus root
  std::string bc_path;
  std::string ground_truth;
};

void to_json(nlohmann::json& j, const CorpusEntry& e);
void from_json(const nlohmann::json& j, CorpusEntry& e);

struct Corpus {
  std::filesystem::path root;  // empty for in-memory corpora
  std::vector<VocalModel> speakers;
  std::vector<CorpusEntry> entries;

  const VocalModel& SpeakerOf(const CorpusEntry& e) const {
    return speakers.at(static_cast<std::size_t>(e.speaker_index));
  }
};

// Speakers and entries only; nothing is rendered or written. Every entry is a
// pure function of (seed, speaker, utterance), so subsets agree with the full plan.
Corpus PlanCorpus(int n_speakers, int utterances_per_speaker,
                  const SceneMix& mix, std::uint64_t seed);

// Attacker for entry e is the next speaker (cyclically).
RenderedPair RenderEntry(const Corpus& corpus, const CorpusEntry& e);

// Renders every entry and writes pairs/*.wav, manifest.json and speakers.json.
Corpus BuildCorpus(const std::filesystem::path& out_dir, int n_speakers,
                   int utterances_per_speaker, const SceneMix& mix,
                   std::uint64_t seed);

nlohmann::json ManifestJson(const Corpus& corpus);
Corpus LoadCorpus(const std::filesystem::path& dir);
AirBonePair LoadPair(const Corpus& corpus, const CorpusEntry& e);

}  // namespace bcauth::synth

#endif  // BCAUTH_SYNTH_CORPUS_H_
