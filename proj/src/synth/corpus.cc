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

#include "bcauth/synth/corpus.h"

#include <cstdio>
#include <fstream>
#include <random>

#include "bcauth/error.h"
#include "bcauth/signal/audio_io.h"
#include "bcauth/synth/machine.h"

namespace bcauth::synth {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kSpeakerTag = 1000;
constexpr std::uint64_t kEntryTag = 2000;

std::string SpeakerId(int s) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%02d", s);
  return buf;
}

nlohmann::json ReadJson(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, p.string() + ": " + e.what());
  }
}

void WriteJson(const fs::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + p.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + p.string());
}

}  // namespace

SceneMix GenuineOnlyMix(double duration_s) {
  SceneTemplate t;
  t.duration_s = duration_s;
  return {t};
}

SceneMix ParseSceneMix(const nlohmann::json& j) {
  Require(j.is_array() && !j.empty(), "scene mix must be a nonempty array");
  SceneMix mix;
  for (const auto& item : j) {
    SceneTemplate t;
    t.weight = item.value("weight", 1.0);
    if (item.contains("scene")) t.scene = item["scene"].get<SceneSpec>();
    t.duration_s = item.value("duration_s", 8.0);
    t.delay_min = item.value("delay_min", 0);
    t.delay_max = item.value("delay_max", t.delay_min);
    Require(t.weight > 0.0, "scene mix weights must be positive");
    Require(t.delay_min <= t.delay_max, "scene mix: delay_min > delay_max");
    mix.push_back(t);
  }
  return mix;
}

nlohmann::json SceneMixToJson(const SceneMix& mix) {
  nlohmann::json j = nlohmann::json::array();
  for (const SceneTemplate& t : mix) {
    j.push_back({{"weight", t.weight}, {"scene", t.scene},
                 {"duration_s", t.duration_s}, {"delay_min", t.delay_min},
                 {"delay_max", t.delay_max}});
  }
  return j;
}

void to_json(nlohmann::json& j, const CorpusEntry& e) {
  j = {{"pair_id", e.pair_id},
       {"speaker_id", e.speaker_id},
       {"speaker_index", e.speaker_index},
       {"utterance_index", e.utterance_index},
       {"ac_path", e.ac_path},
       {"bc_path", e.bc_path},
       {"scene", e.scene},
       {"ground_truth", e.ground_truth},
       {"delay_samples", e.scene.delay_samples},
       {"duration_s", e.duration_s},
       {"seed", e.seed}};
}

void from_json(const nlohmann::json& j, CorpusEntry& e) {
  e.pair_id = j.at("pair_id").get<std::string>();
  e.speaker_id = j.at("speaker_id").get<std::string>();
  e.speaker_index = j.value("speaker_index", 0);
  e.utterance_index = j.value("utterance_index", 0);
  e.ac_path = j.at("ac_path").get<std::string>();
  e.bc_path = j.at("bc_path").get<std::string>();
  e.scene = j.at("scene").get<SceneSpec>();
  e.scene.delay_samples = j.value("delay_samples", e.scene.delay_samples);
  e.ground_truth = j.at("ground_truth").get<std::string>();
  e.duration_s = j.value("duration_s", 8.0);
  e.seed = j.value("seed", std::uint64_t{0});
}

Corpus PlanCorpus(int n_speakers, int utterances_per_speaker,
                  const SceneMix& mix, std::uint64_t seed) {
  Require(n_speakers >= 2, "corpus needs at least 2 speakers");
  Require(utterances_per_speaker >= 1, "corpus needs at least 1 utterance per speaker");
  Require(!mix.empty(), "empty scene mix");
  double total = 0.0;
  for (const SceneTemplate& t : mix) {
    Require(t.weight > 0.0, "scene mix weights must be positive");
    total += t.weight;
  }

  Corpus c;
  for (int s = 0; s < n_speakers; ++s) {
    c.speakers.push_back(
        RandomVocalModel(SpeakerId(s), DeriveSeed(seed, kSpeakerTag + s)));
  }
  const auto& profiles = DeviceProfileNames();
  int machine_count = 0;
  for (int s = 0; s < n_speakers; ++s) {
    for (int u = 0; u < utterances_per_speaker; ++u) {
      const std::uint64_t idx =
          static_cast<std::uint64_t>(s) * utterances_per_speaker + u;
      const std::uint64_t es = DeriveSeed(seed, kEntryTag + idx);
      std::mt19937_64 rng(es);
      std::uniform_real_distribution<double> pick(0.0, total);
      double r = pick(rng);
      std::size_t k = 0;
      while (k + 1 < mix.size() && r >= mix[k].weight) r -= mix[k++].weight;
      const SceneTemplate& t = mix[k];

      CorpusEntry e;
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%s_u%03d", SpeakerId(s).c_str(), u);
      e.pair_id = buf;
      e.speaker_id = c.speakers[s].speaker_id;
      e.speaker_index = s;
      e.utterance_index = u;
      e.scene = t.scene;
      std::uniform_int_distribution<int> delay(t.delay_min, t.delay_max);
      e.scene.delay_samples = delay(rng);
      if (e.scene.attack == AttackClass::kCrossdomainMachine &&
          e.scene.device_profile.empty()) {
        e.scene.device_profile = profiles[machine_count++ % profiles.size()];
      }
      e.duration_s = t.duration_s;
      e.seed = es;
      e.ac_path = "pairs/" + e.pair_id + "_ac.wav";
      e.bc_path = "pairs/" + e.pair_id + "_bc.wav";
      e.ground_truth = GroundTruthFor(e.scene.attack);
      c.entries.push_back(std::move(e));
    }
  }
  return c;
}

RenderedPair RenderEntry(const Corpus& corpus, const CorpusEntry& e) {
  const VocalModel& model = corpus.SpeakerOf(e);
  const signal::Waveform clear =
      SynthUtterance(model, e.duration_s, DeriveSeed(e.seed, 1));
  AttackSources sources;
  switch (e.scene.attack) {
    case AttackClass::kAcousticImpersonation:
    case AttackClass::kCrossdomainImpersonation: {
      const VocalModel& attacker = corpus.speakers.at(
          (static_cast<std::size_t>(e.speaker_index) + 1) % corpus.speakers.size());
      sources.attacker_model = attacker;
      sources.attacker_clear =
          SynthUtterance(attacker, e.duration_s, DeriveSeed(e.seed, 2));
      break;
    }
    case AttackClass::kAcousticReplay:
      sources.replay_source = SynthUtterance(model, e.duration_s, DeriveSeed(e.seed, 3));
      break;
    default:
      break;
  }
  return RenderPair(clear, model, e.scene, DeriveSeed(e.seed, 4), sources);
}

nlohmann::json ManifestJson(const Corpus& corpus) {
  nlohmann::json j = nlohmann::json::array();
  for (const CorpusEntry& e : corpus.entries) j.push_back(e);
  return j;
}

Corpus BuildCorpus(const fs::path& out_dir, int n_speakers,
                   int utterances_per_speaker, const SceneMix& mix,
                   std::uint64_t seed) {
  Corpus c = PlanCorpus(n_speakers, utterances_per_speaker, mix, seed);
  c.root = out_dir;
  std::error_code ec;
  fs::create_directories(out_dir / "pairs", ec);
  if (ec) {
    throw Error(ErrorKind::kIo, "cannot create " + (out_dir / "pairs").string() +
                                    ": " + ec.message());
  }
  const long n = static_cast<long>(c.entries.size());
  std::vector<std::string> errors(c.entries.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const CorpusEntry& e = c.entries[i];
    try {
      const RenderedPair r = RenderEntry(c, e);
      signal::WriteWav(out_dir / e.ac_path, r.pair.ac, signal::WavFormat::kFloat32);
      signal::WriteWav(out_dir / e.bc_path, r.pair.bc, signal::WavFormat::kFloat32);
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  }
  for (const std::string& err : errors) {
    if (!err.empty()) throw Error(ErrorKind::kIo, err);
  }
  WriteJson(out_dir / "manifest.json", ManifestJson(c));
  nlohmann::json speakers = c.speakers;
  WriteJson(out_dir / "speakers.json", speakers);
  return c;
}

Corpus LoadCorpus(const fs::path& dir) {
  Corpus c;
  c.root = dir;
  const nlohmann::json m = ReadJson(dir / "manifest.json");
  const nlohmann::json s = ReadJson(dir / "speakers.json");
  try {
    c.speakers = s.get<std::vector<VocalModel>>();
    c.entries = m.get<std::vector<CorpusEntry>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, dir.string() + ": malformed corpus: " + e.what());
  }
  for (const CorpusEntry& e : c.entries) {
    Require(e.speaker_index >= 0 &&
                static_cast<std::size_t>(e.speaker_index) < c.speakers.size(),
            "manifest entry " + e.pair_id + " has an unknown speaker");
  }
  return c;
}

AirBonePair LoadPair(const Corpus& corpus, const CorpusEntry& e) {
  AirBonePair p;
  p.ac = signal::ReadWav(corpus.root / e.ac_path);
  p.bc = signal::ReadWav(corpus.root / e.bc_path);
  p.speaker_id = e.speaker_id;
  p.scene = e.scene;
  p.ground_truth = e.ground_truth;
  return p;
}

}  // namespace bcauth::synth
