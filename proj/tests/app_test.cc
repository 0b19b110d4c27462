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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include "bcauth/app/config.h"
#include "bcauth/app/pipeline.h"
#include "bcauth/bcsr/speaker.h"
#include "bcauth/bcsr/template_store.h"
#include "bcauth/error.h"
#include "bcauth/eval/experiments.h"
#include "bcauth/signal/audio_io.h"
#include "bcauth/synth/corpus.h"
#include "bcauth/synth/machine.h"
#include "doctest.h"

namespace bcauth::app {
namespace {

namespace fs = std::filesystem;
using synth::AttackClass;
using synth::Corpus;
using synth::CorpusEntry;

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bcauth_app_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// --- configuration ---------------------------------------------------------

TEST_CASE("pipeline config round-trips losslessly") {
  PipelineConfig c;
  c.init.sync.num_frames = 5;
  c.tcs.M = 3;
  c.tcs.threshold = 0.35;
  c.features.cqt.hop_ms = 20.0;
  c.network.embed_dim = 128;
  c.train.epochs = 12;
  c.train.augment_config.min_crop_fraction = 0.9;
  c.pretrain_epochs = 4;
  c.stage2.mode = Stage2Mode::kIdentify;
  c.stage2.layer = bcsr::LayerTag::kLayer2;
  c.stage2.threshold = 0.7;
  c.stage2.machine_detector = false;
  c.paths.model = "/m/x.ckpt";
  c.paths.corpus_roots = {"/a", "/b"};
  const nlohmann::json j = c;
  const PipelineConfig back = j.get<PipelineConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK(back.stage2.threshold == 0.7);
  CHECK(back.stage2.mode == Stage2Mode::kIdentify);
  CHECK(back.paths.corpus_roots.size() == 2);
  // Unset threshold stays unset.
  PipelineConfig d;
  CHECK(!nlohmann::json(d).get<PipelineConfig>().stage2.threshold.has_value());
}

TEST_CASE("config file paths resolve against the file and honour the environment") {
  const fs::path dir = TempDir("config");
  fs::create_directories(dir / "corpus");
  PipelineConfig c;
  c.paths.model = "models/net.ckpt";
  c.paths.template_store = "store/t.json";
  c.paths.corpus_roots = {"corpus"};
  SavePipelineConfig(dir / "cfg.json", c);
  unsetenv("BCAUTH_TEMPLATE_STORE");
  unsetenv("BCAUTH_MODEL");
  const PipelineConfig l = LoadPipelineConfig(dir / "cfg.json");
  CHECK(l.paths.model == dir / "models/net.ckpt");
  CHECK(l.paths.template_store == dir / "store/t.json");
  CHECK(l.paths.DetectorPath() == dir / "models/net.ckpt.detector.json");
  setenv("BCAUTH_TEMPLATE_STORE", "/tmp/elsewhere.json", 1);
  CHECK(LoadPipelineConfig(dir / "cfg.json").paths.template_store == "/tmp/elsewhere.json");
  unsetenv("BCAUTH_TEMPLATE_STORE");

  c.paths.corpus_roots = {"missing"};
  SavePipelineConfig(dir / "bad.json", c);
  CHECK_THROWS_AS(LoadPipelineConfig(dir / "bad.json"), Error);
  std::ofstream(dir / "broken.json") << "{\"tcs\": ";
  CHECK_THROWS_AS(LoadPipelineConfig(dir / "broken.json"), Error);
  CHECK_THROWS_AS(LoadPipelineConfig(dir / "nope.json"), Error);
  PipelineConfig v;
  v.dev_fraction = 1.0;
  CHECK_THROWS_AS(v.Validate(), Error);
}

TEST_CASE("decision record JSON marks a skipped Stage II") {
  DecisionRecord r;
  r.pair_id = "p";
  r.stage1_score = 0.1;
  r.stage1_threshold = 0.4;
  const nlohmann::json j = r;
  CHECK(j.at("stage2") == "skipped (stage1 rejected)");
  CHECK(j.at("final") == false);
  CHECK(!j.contains("timings_ms"));
  r.stage1_accepted = true;
  r.stage2 = Stage2Outcome{};
  r.stage2->accepted = true;
  r.final_decision = true;
  r.timings_ms["tcs"] = 1.0;
  const nlohmann::json k = r;
  CHECK(k.at("stage2").at("accepted") == true);
  CHECK(k.contains("timings_ms"));
}

// --- trained end-to-end fixture ---------------------------------------------

struct Fixture {
  PipelineConfig cfg;
  Corpus corpus;  // 8 speakers; utterances >= 16 are never trained on
  TrainingOutcome outcome;
  std::optional<Stage2Engine> engine;
};

Corpus PlanE2e() {
  synth::SceneMix mix;
  for (int c = 0; c < synth::kNumConditions; ++c) {
    synth::SceneTemplate t;
    t.duration_s = 8.5;
    t.scene.condition = static_cast<synth::Condition>(c);
    t.scene.ac_snr_db = 20.0;
    t.scene.bc_snr_db = 15.0;
    t.delay_min = -300;
    t.delay_max = 300;
    mix.push_back(t);
  }
  Corpus c = synth::PlanCorpus(8, 24, mix, 42);
  // Every fourth utterance becomes a machine or false-trigger pair.
  for (CorpusEntry& e : c.entries) {
    if (e.utterance_index % 4 != 3) continue;
    e.scene.attack = e.utterance_index % 8 == 3 ? AttackClass::kCrossdomainMachine
                                                : AttackClass::kFalseTrigger;
    if (e.scene.attack == AttackClass::kCrossdomainMachine) {
      e.scene.device_profile =
          synth::DeviceProfileNames()[e.speaker_index % synth::DeviceProfileNames().size()];
    }
    e.ground_truth = synth::GroundTruthFor(e.scene.attack);
  }
  return c;
}

Fixture& Trained() {
  static Fixture f = [] {
    const PipelineConfig cfg = DefaultPipelineConfig();
    Corpus corpus = PlanE2e();
    Corpus train = corpus;
    std::erase_if(train.entries, [](const CorpusEntry& e) { return e.utterance_index >= 16; });
    TrainingOutcome outcome = TrainPipeline(train, cfg);
    Stage2Engine engine{outcome.model, bcsr::FeatureExtractor(cfg.features), outcome.detector};
    return Fixture{cfg, std::move(corpus), std::move(outcome), std::move(engine)};
  }();
  return f;
}

std::vector<const CorpusEntry*> Entries(const Corpus& c, AttackClass a, int min_utt) {
  std::vector<const CorpusEntry*> out;
  for (const CorpusEntry& e : c.entries) {
    if (e.scene.attack == a && e.utterance_index >= min_utt) out.push_back(&e);
  }
  return out;
}

bcsr::Template EnrollFirst(const Fixture& f, const std::string& speaker, int clips) {
  std::vector<bcsr::SpeakerEmbedding> emb;
  for (const CorpusEntry& e : f.corpus.entries) {
    if (e.speaker_id != speaker || !synth::IsGenuine(e.ground_truth)) continue;
    if (static_cast<int>(emb.size()) == clips) break;
    const auto feat = PairFeature(FetchPair(f.corpus, e), f.cfg.init, f.engine->extractor);
    emb.push_back(bcsr::Embed(f.engine->model.net, feat, f.cfg.stage2.layer));
  }
  return bcsr::Enroll(speaker, emb, 8.0 * clips, 8.0, "t");
}

TEST_CASE("training reaches high speaker accuracy with a calibrated threshold") {
  const Fixture& f = Trained();
  const auto& last = f.outcome.log.epochs.back();
  MESSAGE("final train accuracy " << last.speaker_accuracy << ", dev id accuracy "
                                  << f.outcome.dev_identification_accuracy << ", dev EER "
                                  << f.outcome.dev_eer);
  CHECK(f.outcome.log.epochs.size() == 60);
  CHECK(last.speaker_accuracy >= 0.99);
  CHECK(f.outcome.model.cosine_threshold.has_value());
  CHECK(f.outcome.detector.has_value());
  CHECK(f.outcome.model.net.spec().num_speakers == 8);
}

TEST_CASE("a training utterance of speaker 3 is identified as speaker 3") {
  const Fixture& f = Trained();
  for (const CorpusEntry& e : f.corpus.entries) {
    if (e.speaker_index != 3 || e.utterance_index != 0) continue;
    const auto feat = PairFeature(FetchPair(f.corpus, e), f.cfg.init, f.engine->extractor);
    CHECK(bcsr::Identify(f.engine->model.net, feat).speaker_id == e.speaker_id);
  }
}

TEST_CASE("same-speaker embeddings are closer than cross-speaker ones") {
  const Fixture& f = Trained();
  // 20 held-out genuine utterances from two speakers.
  std::map<int, std::vector<std::vector<double>>> emb;
  for (const CorpusEntry& e : f.corpus.entries) {
    if (e.speaker_index > 1 || !synth::IsGenuine(e.ground_truth) || e.utterance_index < 4)
      continue;
    if (emb[e.speaker_index].size() == 10) continue;
    const auto feat = PairFeature(FetchPair(f.corpus, e), f.cfg.init, f.engine->extractor);
    emb[e.speaker_index].push_back(
        bcsr::Embed(f.engine->model.net, feat, bcsr::LayerTag::kLayer1).vector);
  }
  double same = 0.0, cross = 0.0;
  int ns = 0, nc = 0;
  for (int a = 0; a < 2; ++a) {
    for (std::size_t i = 0; i < emb[a].size(); ++i) {
      for (std::size_t j = i + 1; j < emb[a].size(); ++j, ++ns) {
        same += bcsr::CosineSimilarity(emb[a][i], emb[a][j]);
      }
      for (const auto& v : emb[1 - a]) {
        cross += bcsr::CosineSimilarity(emb[a][i], v);
        ++nc;
      }
    }
  }
  CHECK(cross / nc < same / ns);
}

TEST_CASE("authenticate: genuine accepted, false trigger skipped, machine rejected") {
  const Fixture& f = Trained();
  std::map<std::string, bcsr::Template> tmpl;
  const auto authenticate = [&](const CorpusEntry& e) {
    if (!tmpl.count(e.speaker_id)) tmpl.emplace(e.speaker_id, EnrollFirst(f, e.speaker_id, 3));
    const synth::AirBonePair p = FetchPair(f.corpus, e);
    return Authenticate(p.ac, signal::AccelRecord::FromWaveform(p.bc), e.speaker_id, f.cfg,
                        *f.engine, &tmpl.at(e.speaker_id), e.pair_id, true);
  };

  int genuine_ok = 0, genuine_n = 0;
  for (const CorpusEntry* e : Entries(f.corpus, AttackClass::kNone, 16)) {
    const DecisionRecord d = authenticate(*e);
    CHECK(d.final_decision == (d.stage1_accepted && d.stage2 && d.stage2->accepted));
    genuine_ok += d.final_decision;
    ++genuine_n;
  }
  MESSAGE("held-out genuine accepted " << genuine_ok << "/" << genuine_n);
  CHECK(genuine_ok >= 0.8 * genuine_n);

  for (const CorpusEntry* e : Entries(f.corpus, AttackClass::kFalseTrigger, 16)) {
    const DecisionRecord d = authenticate(*e);
    CHECK(!d.stage1_accepted);
    CHECK(!d.stage2.has_value());
    CHECK(!d.final_decision);
    CHECK(!d.timings_ms.count("bcsr"));
  }
  int machine_passed = 0;
  for (const CorpusEntry* e : Entries(f.corpus, AttackClass::kCrossdomainMachine, 16)) {
    const DecisionRecord d = authenticate(*e);
    machine_passed += d.stage1_accepted;
    CHECK(!d.final_decision);
    if (d.stage2) CHECK(d.stage2->machine);
  }
  MESSAGE("machine pairs passing Stage I: " << machine_passed);

  // Identical inputs give identical records (timings aside).
  const CorpusEntry& g = *Entries(f.corpus, AttackClass::kNone, 16).front();
  DecisionRecord a = authenticate(g), b = authenticate(g);
  a.timings_ms.clear();
  b.timings_ms.clear();
  CHECK(nlohmann::json(a).dump() == nlohmann::json(b).dump());
}

TEST_CASE("identify mode accepts the claimed speaker only") {
  const Fixture& f = Trained();
  PipelineConfig c = f.cfg;
  c.stage2.mode = Stage2Mode::kIdentify;
  const CorpusEntry& e = *Entries(f.corpus, AttackClass::kNone, 0).front();
  const synth::AirBonePair p = FetchPair(f.corpus, e);
  const auto raw = signal::AccelRecord::FromWaveform(p.bc);
  const DecisionRecord own = Authenticate(p.ac, raw, e.speaker_id, c, *f.engine, nullptr);
  REQUIRE(own.stage2.has_value());
  CHECK(own.stage2->identified == e.speaker_id);
  CHECK(own.final_decision);
  const DecisionRecord other = Authenticate(p.ac, raw, "someone_else", c, *f.engine, nullptr);
  CHECK(!other.final_decision);
  // Verify mode without a template is a usage error.
  CHECK_THROWS_AS(Authenticate(p.ac, raw, e.speaker_id, f.cfg, *f.engine, nullptr), Error);
}

TEST_CASE("file front end: unenrolled users and unreadable inputs") {
  const Fixture& f = Trained();
  const fs::path dir = TempDir("files");
  PipelineConfig c = f.cfg;
  c.paths.template_store = dir / "t.json";
  const CorpusEntry& e = *Entries(f.corpus, AttackClass::kNone, 16).front();
  const synth::AirBonePair p = FetchPair(f.corpus, e);
  signal::WriteWav(dir / "probe_ac.wav", p.ac, signal::WavFormat::kFloat32);
  signal::WriteWav(dir / "probe_bc.wav", p.bc, signal::WavFormat::kFloat32);
  try {
    AuthenticateFiles(dir / "probe_ac.wav", dir / "probe_bc.wav", e.speaker_id, c, *f.engine);
    FAIL("expected kNotFound");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::kNotFound);
  }
  bcsr::TemplateStore(c.paths.template_store).Put(EnrollFirst(f, e.speaker_id, 3));
  const DecisionRecord d =
      AuthenticateFiles(dir / "probe_ac.wav", dir / "probe_bc.wav", e.speaker_id, c, *f.engine);
  CHECK(d.pair_id == "probe_ac");
  CHECK(d.stage1_accepted);
  try {
    AuthenticateFiles(dir / "missing.wav", dir / "probe_bc.wav", e.speaker_id, c, *f.engine);
    FAIL("expected kIo");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::kIo);
  }
  // A stage error names its stage.
  const signal::Waveform short_bc(std::vector<double>(4000, 0.01), 8000);
  try {
    const bcsr::Template t = EnrollFirst(f, e.speaker_id, 1);
    Authenticate(p.ac, signal::AccelRecord::FromWaveform(short_bc), e.speaker_id, c, *f.engine,
                 &t);
    FAIL("expected an error");
  } catch (const Error& err) {
    MESSAGE("stage " << err.stage() << ": " << std::string(err.what()));
    CHECK(!err.stage().empty());
  }
}

TEST_CASE("training outcome saves and reloads into an equivalent engine") {
  const Fixture& f = Trained();
  const fs::path dir = TempDir("save");
  PipelineConfig c = f.cfg;
  c.paths.model = dir / "m.ckpt";
  SaveTrainingOutcome(f.outcome, c);
  const Stage2Engine e = Stage2Engine::Load(c);
  CHECK(e.detector.has_value());
  CHECK(e.model.cosine_threshold == f.outcome.model.cosine_threshold);
  const auto feat = PairFeature(FetchPair(f.corpus, f.corpus.entries.front()), c.init, e.extractor);
  CHECK(bcsr::Embed(e.model.net, feat, bcsr::LayerTag::kLayer1).vector ==
        bcsr::Embed(f.engine->model.net, feat, bcsr::LayerTag::kLayer1).vector);
}

// --- experiments -----------------------------------------------------------

Corpus Stage1Corpus() {
  Corpus c = synth::PlanCorpus(6, 8, synth::GenuineOnlyMix(4.0), 77);
  for (CorpusEntry& e : c.entries) {
    if (e.utterance_index % 2) e.scene.attack = AttackClass::kFalseTrigger;
    e.scene.bc_snr_db = 5.0;
    e.ground_truth = synth::GroundTruthFor(e.scene.attack);
  }
  return c;
}

TEST_CASE("noise grid and duration protocols agree on the same pairs") {
  const Corpus c = Stage1Corpus();
  const PipelineConfig cfg = DefaultPipelineConfig();
  const eval::Report a = eval::RunExperiment(c, cfg, eval::Protocol::kStage1NormalVsFalseTrigger);
  const eval::Report b = eval::RunExperiment(c, cfg, eval::Protocol::kStage1NoiseGrid);
  REQUIRE(a.sets.size() == 1);
  REQUIRE(b.sets.size() == 1);
  CHECK(a.metrics.at("4s").at("eer") == b.metrics.at("ac=clean/bc=5dB").at("eer"));
  CHECK(a.scores.size() == c.entries.size());
  // Fixed corpus and config: identical reports.
  const eval::Report again = eval::RunExperiment(c, cfg, eval::Protocol::kStage1NoiseGrid);
  CHECK(again.metrics == b.metrics);
}

TEST_CASE("protocol and corpus mismatches are rejected") {
  Corpus genuine = synth::PlanCorpus(2, 2, synth::GenuineOnlyMix(4.0), 3);
  const PipelineConfig cfg = DefaultPipelineConfig();
  CHECK_THROWS_AS(eval::RunExperiment(genuine, cfg, eval::Protocol::kStage1AcousticAttacks),
                  Error);
  CHECK_THROWS_AS(eval::RunExperiment(genuine, cfg, eval::Protocol::kStage1NormalVsFalseTrigger),
                  Error);
  CHECK_THROWS_AS(eval::RunExperiment(genuine, cfg, eval::Protocol::kStage2Verification), Error);
  try {
    eval::ParseProtocol("bogus");
    FAIL("expected kNotFound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotFound);
  }
  for (eval::Protocol p : eval::AllProtocols()) CHECK(eval::ParseProtocol(eval::ProtocolName(p)) == p);
}

TEST_CASE("strict aggregation never exceeds either stage") {
  const Fixture& f = Trained();
  Corpus held = f.corpus;
  std::erase_if(held.entries, [](const CorpusEntry& e) { return e.utterance_index < 12; });
  eval::ExperimentOptions opt;
  opt.engine = &*f.engine;
  const eval::Report r =
      eval::RunExperiment(held, f.cfg, eval::Protocol::kOverallStrictAggregation, opt);
  for (const auto& [gt, m] : r.metrics.at("classes").items()) {
    const double fin = m.at("final_acceptance");
    CHECK(fin <= m.at("stage1_acceptance").get<double>());
    CHECK(fin <= m.at("stage2_acceptance").get<double>());
  }
  for (const DecisionRecord& d : r.decisions) {
    CHECK(d.stage2.has_value() == d.stage1_accepted);
    CHECK(d.final_decision == (d.stage1_accepted && d.stage2 && d.stage2->accepted));
  }
  const fs::path dir = TempDir("report");
  eval::WriteReport(dir, r);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "scores.csv"));
  std::ifstream csv(dir / "scores.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "pair_id,group,label,score");
}

TEST_CASE("verification report covers every preset and layer") {
  const Fixture& f = Trained();
  Corpus held = f.corpus;
  std::erase_if(held.entries, [](const CorpusEntry& e) { return e.utterance_index < 12; });
  eval::ExperimentOptions opt;
  opt.engine = &*f.engine;
  const eval::Report r = eval::RunExperiment(held, f.cfg, eval::Protocol::kStage2Verification, opt);
  for (const char* layer : {"layer-1", "layer-2", "layer-3"}) {
    for (const char* secs : {"8s", "24s", "40s"}) {
      CHECK(r.metrics.contains(std::string(layer) + "/" + secs));
    }
  }
  CHECK(r.metrics.at("identification").at("accuracy").get<double>() >= 0.9);
}

}  // namespace
}  // namespace bcauth::app
