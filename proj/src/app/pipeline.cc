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

#include "bcauth/app/pipeline.h"

#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>

#include "bcauth/error.h"
#include "bcauth/eval/metrics.h"

namespace bcauth::app {
namespace {

using Clock = std::chrono::steady_clock;

double Ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

template <typename F>
auto InStage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.WithStage(stage);
  }
}

}  // namespace

synth::AirBonePair FetchPair(const synth::Corpus& corpus, const synth::CorpusEntry& e) {
  if (corpus.root.empty()) return synth::RenderEntry(corpus, e).pair;
  return synth::LoadPair(corpus, e);
}

void ParallelFor(int n, const std::function<void(int)>& body) {
  std::exception_ptr failure;
  std::mutex mu;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    {
      std::lock_guard<std::mutex> lock(mu);
      if (failure) continue;
    }
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

Stage1Outcome RunStage1(const signal::Waveform& ac, const signal::AccelRecord& bc,
                        const PipelineConfig& cfg) {
  Stage1Outcome out;
  out.init = InStage("init", [&] { return init::Initialize(ac, bc, cfg.init); });
  out.tcs = InStage("tcs", [&] { return tcs::TcsScore(out.init.ac, out.init.bc, cfg.tcs); });
  return out;
}

bcsr::BcFeature PairFeature(const synth::AirBonePair& pair, const init::InitConfig& init,
                            const bcsr::FeatureExtractor& extractor) {
  const signal::Waveform bc =
      init::PreprocessBc(signal::AccelRecord::FromWaveform(pair.bc), init);
  return extractor.Extract(bc, pair.scene.condition, pair.speaker_id);
}

Stage2Engine Stage2Engine::Load(const PipelineConfig& cfg) {
  bcsr::Model model = bcsr::LoadModel(cfg.paths.model);
  bcsr::FeatureExtractor extractor(model.features);
  std::optional<bcsr::MachineDetector> detector;
  const auto det_path = cfg.paths.DetectorPath();
  if (std::filesystem::exists(det_path)) {
    std::ifstream in(det_path);
    nlohmann::json j;
    try {
      in >> j;
      detector = j.get<bcsr::MachineDetector>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kIo, det_path.string() + ": " + e.what());
    }
  }
  return Stage2Engine{std::move(model), std::move(extractor), std::move(detector)};
}

void to_json(nlohmann::json& j, const DecisionRecord& r) {
  j = {{"pair_id", r.pair_id},
       {"user_id", r.user_id},
       {"stage1",
        {{"score", r.stage1_score},
         {"threshold", r.stage1_threshold},
         {"accepted", r.stage1_accepted},
         {"estimated_delay_samples", r.estimated_delay_samples}}}};
  if (r.stage2) {
    const Stage2Outcome& s = *r.stage2;
    nlohmann::json s2 = {{"mode", Stage2ModeName(s.mode)},
                         {"score", s.score},
                         {"threshold", s.threshold},
                         {"machine", s.machine},
                         {"accepted", s.accepted}};
    if (s.mode == Stage2Mode::kIdentify) s2["identified"] = s.identified;
    s2["machine_score"] = s.machine_score ? nlohmann::json(*s.machine_score) : nlohmann::json();
    j["stage2"] = s2;
  } else {
    j["stage2"] = "skipped (stage1 rejected)";
  }
  j["final"] = r.final_decision;
  if (!r.timings_ms.empty()) j["timings_ms"] = r.timings_ms;
}

Stage2Outcome RunStage2(const signal::Waveform& bc, const std::string& user_id,
                        const PipelineConfig& cfg, const Stage2Engine& engine,
                        const bcsr::Template* tmpl) {
  if (cfg.stage2.mode == Stage2Mode::kVerify) {
    Require(tmpl != nullptr, "stage2: verify mode needs an enrolled template");
  }
  return InStage("bcsr", [&] {
    Stage2Outcome s;
    s.mode = cfg.stage2.mode;
    const bcsr::BcFeature f = engine.extractor.Extract(bc);
    if (s.mode == Stage2Mode::kVerify) {
      const std::optional<double> threshold =
          cfg.stage2.threshold ? cfg.stage2.threshold : engine.model.cosine_threshold;
      Require(threshold.has_value(), "no verification threshold configured or calibrated");
      const bcsr::Verification v =
          bcsr::Verify(bcsr::Embed(engine.model.net, f, tmpl->mean.tag), *tmpl, *threshold);
      s.score = v.score;
      s.threshold = v.threshold;
      s.accepted = v.accepted;
    } else {
      const bcsr::Identification id = bcsr::Identify(engine.model.net, f);
      s.identified = id.speaker_id;
      s.score = id.scores[id.index];
      s.threshold = cfg.stage2.identify_min_score;
      s.accepted = s.score >= s.threshold && (user_id.empty() || user_id == id.speaker_id);
    }
    if (cfg.stage2.machine_detector && engine.detector) {
      const bcsr::SpeakerEmbedding e = bcsr::Embed(engine.model.net, f, bcsr::LayerTag::kLayer1);
      s.machine_score = engine.detector->Score(e.vector);
      s.machine = *s.machine_score > 0.0;
      if (s.machine) s.accepted = false;
    }
    return s;
  });
}

DecisionRecord Authenticate(const signal::Waveform& ac, const signal::AccelRecord& bc,
                            const std::string& user_id, const PipelineConfig& cfg,
                            const Stage2Engine& engine, const bcsr::Template* tmpl,
                            const std::string& pair_id, bool timings) {
  DecisionRecord r;
  r.pair_id = pair_id;
  r.user_id = user_id;
  if (cfg.stage2.mode == Stage2Mode::kVerify) {
    Require(tmpl != nullptr, "authenticate: verify mode needs an enrolled template");
  }
  const auto t0 = Clock::now();
  const init::InitResult ir =
      InStage("init", [&] { return init::Initialize(ac, bc, cfg.init); });
  const auto t1 = Clock::now();
  const tcs::TcsResult tr =
      InStage("tcs", [&] { return tcs::TcsScore(ir.ac, ir.bc, cfg.tcs); });
  const auto t2 = Clock::now();
  r.stage1_score = tr.score;
  r.stage1_threshold = cfg.tcs.threshold;
  r.stage1_accepted = tr.accepted;
  r.estimated_delay_samples = ir.estimated_delay_samples;
  if (timings) {
    r.timings_ms["init"] = Ms(t0, t1);
    r.timings_ms["tcs"] = Ms(t1, t2);
  }
  if (!r.stage1_accepted) return r;

  Stage2Outcome s2 = RunStage2(ir.bc, user_id, cfg, engine, tmpl);
  if (timings) r.timings_ms["bcsr"] = Ms(t2, Clock::now());
  r.stage2 = s2;
  r.final_decision = r.stage1_accepted && s2.accepted;
  return r;
}

DecisionRecord AuthenticateFiles(const std::filesystem::path& ac_file,
                                 const std::filesystem::path& bc_file,
                                 const std::string& user_id, const PipelineConfig& cfg,
                                 const Stage2Engine& engine, bool timings) {
  std::optional<bcsr::Template> tmpl;
  if (cfg.stage2.mode == Stage2Mode::kVerify) {
    tmpl = bcsr::TemplateStore(cfg.paths.template_store).Get(user_id);
  }
  const signal::Waveform ac = signal::ReadWav(ac_file);
  const signal::AccelRecord bc = signal::ReadAccel(bc_file);
  return Authenticate(ac, bc, user_id, cfg, engine, tmpl ? &*tmpl : nullptr,
                      ac_file.stem().string(), timings);
}

nlohmann::json TrainingOutcome::Report() const {
  nlohmann::json j = {{"train_log", log},
                      {"dev_identification_accuracy", dev_identification_accuracy},
                      {"dev_eer", dev_eer},
                      {"threshold", threshold},
                      {"machine_detector", detector.has_value()}};
  if (pretrain_log) j["pretrain_log"] = *pretrain_log;
  return j;
}

TrainingOutcome TrainPipeline(const synth::Corpus& corpus, const PipelineConfig& cfg,
                              const synth::Corpus* pretrain, const ProgressFn& progress) {
  cfg.Validate();
  const auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  const bcsr::FeatureExtractor extractor(cfg.features);

  // Utterance count per speaker decides the dev split.
  std::map<int, int> utts;
  for (const auto& e : corpus.entries) {
    if (synth::IsGenuine(e.ground_truth)) {
      utts[e.speaker_index] = std::max(utts[e.speaker_index], e.utterance_index + 1);
    }
  }
  std::vector<int> train_idx, dev_idx, machine_idx;
  for (int i = 0; i < static_cast<int>(corpus.entries.size()); ++i) {
    const auto& e = corpus.entries[i];
    if (e.scene.attack == synth::AttackClass::kCrossdomainMachine) {
      machine_idx.push_back(i);
    } else if (synth::IsGenuine(e.ground_truth)) {
      const int n = utts[e.speaker_index];
      const int n_dev = static_cast<int>(cfg.dev_fraction * n);
      (e.utterance_index >= n - n_dev ? dev_idx : train_idx).push_back(i);
    }
  }
  Require(!train_idx.empty(), "train: corpus has no genuine entries");

  const auto features = [&](const synth::Corpus& c, const std::vector<int>& idx,
                            bool use_ac) {
    std::vector<bcsr::BcFeature> out(idx.size());
    ParallelFor(static_cast<int>(idx.size()), [&](int k) {
      const auto& e = c.entries[idx[k]];
      synth::AirBonePair p = FetchPair(c, e);
      if (use_ac) p.bc = p.ac;
      out[k] = PairFeature(p, cfg.init, extractor);
      out[k].speaker = e.speaker_id;
    });
    return out;
  };

  TrainingOutcome t{bcsr::Model{cfg.features, bcsr::Network<float>(cfg.network), {}},
                    {}, {}, 0.0, 0.0, 0.0, {}};
  const auto log_epoch = [&](const char* what) {
    return [&, what](const bcsr::EpochLog& l) {
      say(std::string(what) + " epoch " + std::to_string(l.epoch) +
          " L_s=" + std::to_string(l.speaker_loss) + " L_v=" + std::to_string(l.condition_loss) +
          " acc=" + std::to_string(l.speaker_accuracy));
    };
  };

  std::optional<bcsr::Network<float>> warm;
  if (pretrain && cfg.pretrain_epochs > 0) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(pretrain->entries.size()); ++i) {
      if (synth::IsGenuine(pretrain->entries[i].ground_truth)) idx.push_back(i);
    }
    say("pretraining features: " + std::to_string(idx.size()));
    const auto pre = features(*pretrain, idx, true);
    bcsr::TrainConfig pc = cfg.train;
    pc.epochs = cfg.pretrain_epochs;
    pc.lambda = 0.0;  // clean AC carries no wearer condition
    bcsr::TrainResult pr = bcsr::Train(pre, cfg.network, pc, nullptr, log_epoch("pretrain"));
    t.pretrain_log = pr.log;
    // Architecture of the fine-tuned net differs only in the speaker head.
    warm.emplace(std::move(pr.net));
  }

  say("training features: " + std::to_string(train_idx.size()));
  const auto train = features(corpus, train_idx, false);
  bcsr::TrainResult tr = bcsr::Train(train, cfg.network, cfg.train,
                                     warm ? &*warm : nullptr, log_epoch("train"));
  t.log = tr.log;
  t.model.net = std::move(tr.net);

  if (!dev_idx.empty()) {
    const auto dev = features(corpus, dev_idx, false);
    std::vector<bcsr::SpeakerEmbedding> emb;
    int correct = 0;
    for (const auto& f : dev) {
      emb.push_back(bcsr::Embed(t.model.net, f, cfg.stage2.layer));
      correct += bcsr::Identify(t.model.net, f).speaker_id == *f.speaker;
    }
    t.dev_identification_accuracy = static_cast<double>(correct) / dev.size();
    eval::ScoreSet s;
    for (std::size_t a = 0; a < dev.size(); ++a) {
      for (std::size_t b = a + 1; b < dev.size(); ++b) {
        const double c = bcsr::CosineSimilarity(emb[a].vector, emb[b].vector);
        (*dev[a].speaker == *dev[b].speaker ? s.genuine : s.impostor).push_back(c);
      }
    }
    if (!s.genuine.empty() && !s.impostor.empty()) {
      const eval::EerResult eer = eval::ComputeEer(s);
      t.dev_eer = eer.eer;
      t.threshold = eer.threshold;
      t.model.cosine_threshold = eer.threshold;
    }
  }

  if (!machine_idx.empty()) {
    const auto machine = features(corpus, machine_idx, false);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (const auto& f : train) {
      x.push_back(bcsr::Embed(t.model.net, f, bcsr::LayerTag::kLayer1).vector);
      y.push_back(0);
    }
    for (const auto& f : machine) {
      x.push_back(bcsr::Embed(t.model.net, f, bcsr::LayerTag::kLayer1).vector);
      y.push_back(1);
    }
    t.detector = bcsr::FitLda(x, y);
  }
  return t;
}

void SaveTrainingOutcome(const TrainingOutcome& t, const PipelineConfig& cfg) {
  if (cfg.paths.model.has_parent_path()) {
    std::filesystem::create_directories(cfg.paths.model.parent_path());
  }
  bcsr::SaveModel(cfg.paths.model, t.model);
  const auto det = cfg.paths.DetectorPath();
  if (t.detector) {
    std::ofstream out(det);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + det.string());
    out << nlohmann::json(*t.detector).dump(2) << '\n';
  } else if (std::filesystem::exists(det)) {
    std::filesystem::remove(det);
  }
}

}  // namespace bcauth::app
