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

#include "bcauth/eval/experiments.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "bcauth/bcsr/detector.h"
#include "bcauth/bcsr/speaker.h"
#include "bcauth/error.h"

namespace bcauth::eval {
namespace {

using synth::AttackClass;
using synth::CorpusEntry;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string SnrLabel(const std::optional<double>& snr) {
  return snr ? Num(*snr) + "dB" : "clean";
}

nlohmann::json SetMetrics(const ScoreSet& s, double operating_threshold) {
  nlohmann::json j = {{"n_genuine", s.genuine.size()}, {"n_impostor", s.impostor.size()}};
  if (s.genuine.empty() || s.impostor.empty()) {
    j["eer"] = nullptr;
    return j;
  }
  const EerResult e = ComputeEer(s);
  j["eer"] = e.eer;
  j["eer_threshold"] = e.threshold;
  j["operating_threshold"] = operating_threshold;
  j["far"] = FalseAcceptRate(s, operating_threshold);
  j["frr"] = FalseRejectRate(s, operating_threshold);
  return j;
}

bool IsFalseTrigger(const CorpusEntry& e) { return e.scene.attack == AttackClass::kFalseTrigger; }
bool IsGenuine(const CorpusEntry& e) { return synth::IsGenuine(e.ground_truth); }

// Entries of each class for two-class Stage I protocols, grouped by key.
template <typename Key>
Report Stage1Grouped(const synth::Corpus& corpus, const app::PipelineConfig& cfg,
                     Protocol p, Key key, bool (*impostor)(const CorpusEntry&)) {
  const std::vector<double> scores = Stage1Scores(corpus, cfg);
  Report r;
  r.protocol = ProtocolName(p);
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    const CorpusEntry& e = corpus.entries[i];
    const bool genuine = IsGenuine(e);
    if (!genuine && !impostor(e)) continue;
    const std::string g = key(e);
    ScoreSet& s = r.sets[g];
    s.label = g;
    (genuine ? s.genuine : s.impostor).push_back(scores[i]);
    r.scores.push_back({e.pair_id, g, e.ground_truth, scores[i]});
  }
  Require(!r.sets.empty(), std::string(ProtocolName(p)) + ": corpus has no matching entries");
  r.metrics = nlohmann::json::object();
  for (const auto& [g, s] : r.sets) {
    Require(!s.genuine.empty() && !s.impostor.empty(),
            std::string(ProtocolName(p)) + ": group " + g + " lacks one of the classes");
    r.metrics[g] = SetMetrics(s, cfg.tcs.threshold);
  }
  return r;
}

std::vector<bcsr::BcFeature> Features(const synth::Corpus& corpus, const std::vector<int>& idx,
                                      const app::PipelineConfig& cfg,
                                      const bcsr::FeatureExtractor& fx) {
  std::vector<bcsr::BcFeature> out(idx.size());
  app::ParallelFor(static_cast<int>(idx.size()), [&](int k) {
    out[k] = app::PairFeature(app::FetchPair(corpus, corpus.entries[idx[k]]), cfg.init, fx);
  });
  return out;
}

const app::Stage2Engine& NeedEngine(const ExperimentOptions& o, Protocol p) {
  Require(o.engine != nullptr,
          std::string(ProtocolName(p)) + " needs a trained model");
  return *o.engine;
}

// Genuine entries per speaker index, ordered by utterance.
std::map<int, std::vector<int>> GenuineBySpeaker(const synth::Corpus& corpus) {
  std::map<int, std::vector<int>> by;
  for (int i = 0; i < static_cast<int>(corpus.entries.size()); ++i) {
    if (IsGenuine(corpus.entries[i])) by[corpus.entries[i].speaker_index].push_back(i);
  }
  for (auto& [s, v] : by) {
    std::sort(v.begin(), v.end(), [&](int a, int b) {
      return corpus.entries[a].utterance_index < corpus.entries[b].utterance_index;
    });
  }
  return by;
}

Report Stage2Verification(const synth::Corpus& corpus, const app::PipelineConfig& cfg,
                          const ExperimentOptions& opt) {
  const app::Stage2Engine& eng = NeedEngine(opt, Protocol::kStage2Verification);
  Require(!opt.enrollment_clips.empty(), "stage2_verification: no enrollment presets");
  const int max_clips =
      *std::max_element(opt.enrollment_clips.begin(), opt.enrollment_clips.end());
  const auto by = GenuineBySpeaker(corpus);
  Require(by.size() >= 2, "stage2_verification: need at least 2 speakers");
  std::vector<int> idx;
  for (const auto& [s, v] : by) {
    Require(static_cast<int>(v.size()) > max_clips,
            "stage2_verification: every speaker needs more than " +
                std::to_string(max_clips) + " genuine utterances");
    idx.insert(idx.end(), v.begin(), v.end());
  }
  const auto feats = Features(corpus, idx, cfg, eng.extractor);
  std::map<int, int> pos;  // entry index -> feature index
  for (std::size_t k = 0; k < idx.size(); ++k) pos[idx[k]] = static_cast<int>(k);
  const double seg = eng.model.features.seconds;

  Report r;
  r.protocol = ProtocolName(Protocol::kStage2Verification);
  r.metrics = nlohmann::json::object();
  for (bcsr::LayerTag tag : opt.layers) {
    std::vector<bcsr::SpeakerEmbedding> emb(feats.size());
    for (std::size_t k = 0; k < feats.size(); ++k) {
      emb[k] = bcsr::Embed(eng.model.net, feats[k], tag);
    }
    for (int clips : opt.enrollment_clips) {
      const std::string g =
          std::string(bcsr::LayerTagName(tag)) + "/" + Num(clips * seg) + "s";
      ScoreSet& s = r.sets[g];
      s.label = g;
      for (const auto& [spk, v] : by) {
        std::vector<bcsr::SpeakerEmbedding> enroll;
        for (int c = 0; c < clips; ++c) enroll.push_back(emb[pos[v[c]]]);
        const bcsr::Template t = bcsr::Enroll(corpus.entries[v[0]].speaker_id, enroll,
                                              clips * seg, seg, "-");
        // Probes: utterances past the largest enrollment preset, so every
        // preset is scored on the same probes.
        for (const auto& [spk2, v2] : by) {
          for (std::size_t p = max_clips; p < v2.size(); ++p) {
            const double score =
                bcsr::Verify(emb[pos[v2[p]]], t, 0.0).score;
            const bool same = spk2 == spk;
            (same ? s.genuine : s.impostor).push_back(score);
            r.scores.push_back({corpus.entries[v2[p]].pair_id + "@" + t.user_id, g,
                                same ? "genuine" : "impostor", score});
          }
        }
      }
      const double thr = cfg.stage2.threshold ? *cfg.stage2.threshold
                                              : eng.model.cosine_threshold.value_or(0.0);
      r.metrics[g] = SetMetrics(s, thr);
    }
  }

  // Closed-set identification on probes whose speaker the model was trained on.
  const auto& ids = eng.model.net.spec().speaker_ids;
  int known = 0, correct = 0;
  for (const auto& [spk, v] : by) {
    for (std::size_t p = max_clips; p < v.size(); ++p) {
      const CorpusEntry& e = corpus.entries[v[p]];
      if (std::find(ids.begin(), ids.end(), e.speaker_id) == ids.end()) continue;
      ++known;
      correct += bcsr::Identify(eng.model.net, feats[pos[v[p]]]).speaker_id == e.speaker_id;
    }
  }
  r.metrics["identification"] = {
      {"probes", known},
      {"accuracy", known ? nlohmann::json(static_cast<double>(correct) / known) : nlohmann::json()}};
  return r;
}

Report MachineDetection(const synth::Corpus& corpus, const app::PipelineConfig& cfg,
                        const ExperimentOptions& opt) {
  const app::Stage2Engine& eng = NeedEngine(opt, Protocol::kMachineDetection);
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(corpus.entries.size()); ++i) {
    const CorpusEntry& e = corpus.entries[i];
    if (IsGenuine(e) || e.scene.attack == AttackClass::kCrossdomainMachine) idx.push_back(i);
  }
  const auto feats = Features(corpus, idx, cfg, eng.extractor);
  std::vector<std::vector<double>> xtr, xte;
  std::vector<int> ytr, yte;
  std::vector<std::string> dev_te;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const CorpusEntry& e = corpus.entries[idx[k]];
    const int y = IsGenuine(e) ? 0 : 1;
    auto v = bcsr::Embed(eng.model.net, feats[k], bcsr::LayerTag::kLayer1).vector;
    // Even utterances train, odd ones are held out.
    if (e.utterance_index % 2 == 0) {
      xtr.push_back(std::move(v));
      ytr.push_back(y);
    } else {
      xte.push_back(std::move(v));
      yte.push_back(y);
      dev_te.push_back(y ? e.scene.device_profile : "");
    }
  }
  Require(!xte.empty(), "machine_detection: no held-out entries");
  Report r;
  r.protocol = ProtocolName(Protocol::kMachineDetection);
  r.metrics = nlohmann::json::object();
  std::set<std::string> devices(dev_te.begin(), dev_te.end());
  devices.erase("");
  for (const bcsr::MachineDetector& det : {bcsr::FitLda(xtr, ytr), bcsr::FitLogistic(xtr, ytr)}) {
    const std::string kind = bcsr::DetectorKindName(det.kind);
    nlohmann::json m = {{"overall_accuracy", bcsr::Accuracy(det, xte, yte)}};
    for (const std::string& d : devices) {
      std::vector<std::vector<double>> x;
      std::vector<int> y;
      for (std::size_t k = 0; k < xte.size(); ++k) {
        if (dev_te[k].empty() || dev_te[k] == d) {
          x.push_back(xte[k]);
          y.push_back(yte[k]);
        }
      }
      m["per_device"][d] = bcsr::Accuracy(det, x, y);
    }
    r.metrics[kind] = m;
    if (det.kind == bcsr::DetectorKind::kLda) r.detector = det;
    ScoreSet& s = r.sets[kind];
    s.label = kind;
    std::size_t k = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const CorpusEntry& e = corpus.entries[idx[j]];
      if (e.utterance_index % 2 == 0) continue;
      // Higher = more human, so "genuine" keeps its meaning.
      const double score = -det.Score(xte[k]);
      (yte[k] ? s.impostor : s.genuine).push_back(score);
      r.scores.push_back({e.pair_id, kind, e.ground_truth, score});
      ++k;
    }
  }
  return r;
}

Report OverallStrict(const synth::Corpus& corpus, const app::PipelineConfig& cfg,
                     const ExperimentOptions& opt) {
  const app::Stage2Engine& eng = NeedEngine(opt, Protocol::kOverallStrictAggregation);
  app::PipelineConfig c = cfg;
  c.stage2.mode = app::Stage2Mode::kVerify;
  const auto by = GenuineBySpeaker(corpus);
  const int n_enroll = opt.overall_enroll_clips;
  std::set<int> enroll_entries;
  std::vector<int> enroll_idx;
  for (const auto& [s, v] : by) {
    Require(static_cast<int>(v.size()) >= n_enroll,
            "overall_strict_aggregation: not enough genuine utterances to enroll");
    for (int k = 0; k < n_enroll; ++k) {
      enroll_entries.insert(v[k]);
      enroll_idx.push_back(v[k]);
    }
  }
  const auto ef = Features(corpus, enroll_idx, cfg, eng.extractor);
  std::map<std::string, bcsr::Template> templates;
  {
    std::map<std::string, std::vector<bcsr::SpeakerEmbedding>> per;
    for (std::size_t k = 0; k < enroll_idx.size(); ++k) {
      per[corpus.entries[enroll_idx[k]].speaker_id].push_back(
          bcsr::Embed(eng.model.net, ef[k], cfg.stage2.layer));
    }
    for (auto& [u, e] : per) {
      const double secs = static_cast<double>(e.size()) * eng.model.features.seconds;
      templates.emplace(u, bcsr::Enroll(u, e, secs, eng.model.features.seconds, "-"));
    }
  }

  std::vector<int> eval_idx;
  for (int i = 0; i < static_cast<int>(corpus.entries.size()); ++i) {
    if (!enroll_entries.count(i)) eval_idx.push_back(i);
  }
  struct Outcome {
    app::Stage1Outcome s1;
    app::Stage2Outcome s2;
  };
  std::vector<Outcome> out(eval_idx.size());
  app::ParallelFor(static_cast<int>(eval_idx.size()), [&](int k) {
    const CorpusEntry& e = corpus.entries[eval_idx[k]];
    const synth::AirBonePair p = app::FetchPair(corpus, e);
    out[k].s1 = app::RunStage1(p.ac, signal::AccelRecord::FromWaveform(p.bc), c);
    out[k].s2 = app::RunStage2(out[k].s1.init.bc, e.speaker_id, c, eng,
                               &templates.at(e.speaker_id));
  });

  Report r;
  r.protocol = ProtocolName(Protocol::kOverallStrictAggregation);
  struct Rates {
    int n = 0, s1 = 0, s2 = 0, both = 0;
  };
  std::map<std::string, Rates> rates;
  int machine_passed = 0, machine_passed_rejected = 0;
  for (std::size_t k = 0; k < eval_idx.size(); ++k) {
    const CorpusEntry& e = corpus.entries[eval_idx[k]];
    const bool a1 = out[k].s1.tcs.accepted, a2 = out[k].s2.accepted;
    Rates& rt = rates[e.ground_truth];
    ++rt.n;
    rt.s1 += a1;
    rt.s2 += a2;
    rt.both += a1 && a2;
    if (e.scene.attack == AttackClass::kCrossdomainMachine && a1) {
      ++machine_passed;
      machine_passed_rejected += !a2;
    }
    app::DecisionRecord d;
    d.pair_id = e.pair_id;
    d.user_id = e.speaker_id;
    d.stage1_score = out[k].s1.tcs.score;
    d.stage1_threshold = c.tcs.threshold;
    d.stage1_accepted = a1;
    d.estimated_delay_samples = out[k].s1.init.estimated_delay_samples;
    if (a1) d.stage2 = out[k].s2;
    d.final_decision = a1 && a2;
    r.decisions.push_back(d);
    r.scores.push_back({e.pair_id, "stage1", e.ground_truth, out[k].s1.tcs.score});
    r.scores.push_back({e.pair_id, "stage2", e.ground_truth, out[k].s2.score});
  }
  r.metrics = nlohmann::json::object();
  for (const auto& [gt, rt] : rates) {
    r.metrics["classes"][gt] = {{"pairs", rt.n},
                                {"stage1_acceptance", static_cast<double>(rt.s1) / rt.n},
                                {"stage2_acceptance", static_cast<double>(rt.s2) / rt.n},
                                {"final_acceptance", static_cast<double>(rt.both) / rt.n}};
  }
  r.metrics["machine_passed_stage1"] = machine_passed;
  r.metrics["machine_passed_stage1_rejected_by_stage2"] =
      machine_passed ? nlohmann::json(static_cast<double>(machine_passed_rejected) / machine_passed)
                     : nlohmann::json();
  return r;
}

void WriteCurveFiles(const std::filesystem::path& dir, const std::string& group,
                     const ScoreSet& s) {
  std::string name = group;
  for (char& ch : name) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '.') ch = '_';
  }
  if (s.genuine.empty() || s.impostor.empty()) return;
  std::ofstream roc(dir / ("roc_" + name + ".dat"));
  roc << "# threshold far frr\n";
  for (const RocPoint& p : RocCurve(s)) {
    roc << p.threshold << ' ' << p.far << ' ' << p.frr << '\n';
  }
  double lo = s.genuine.front(), hi = lo;
  for (const auto* v : {&s.genuine, &s.impostor}) {
    for (double x : *v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  const Histogram hg = MakeHistogram(s.genuine, 40, lo, hi);
  const Histogram hi_ = MakeHistogram(s.impostor, 40, lo, hi);
  std::ofstream hist(dir / ("hist_" + name + ".dat"));
  hist << "# bin_center genuine impostor\n";
  const double w = (hi - lo) / 40.0;
  for (std::size_t b = 0; b < hg.counts.size(); ++b) {
    hist << lo + (b + 0.5) * w << ' ' << hg.counts[b] << ' ' << hi_.counts[b] << '\n';
  }
}

}  // namespace

const char* ProtocolName(Protocol p) {
  switch (p) {
    case Protocol::kStage1NormalVsFalseTrigger: return "stage1_normal_vs_false_trigger";
    case Protocol::kStage1NoiseGrid: return "stage1_noise_grid";
    case Protocol::kStage1AcousticAttacks: return "stage1_acoustic_attacks";
    case Protocol::kStage2Verification: return "stage2_verification";
    case Protocol::kMachineDetection: return "machine_detection";
    case Protocol::kOverallStrictAggregation: return "overall_strict_aggregation";
  }
  return "unknown";
}

const std::vector<Protocol>& AllProtocols() {
  static const std::vector<Protocol> all = {
      Protocol::kStage1NormalVsFalseTrigger, Protocol::kStage1NoiseGrid,
      Protocol::kStage1AcousticAttacks,      Protocol::kStage2Verification,
      Protocol::kMachineDetection,           Protocol::kOverallStrictAggregation};
  return all;
}

Protocol ParseProtocol(const std::string& name) {
  for (Protocol p : AllProtocols()) {
    if (name == ProtocolName(p)) return p;
  }
  throw Error(ErrorKind::kNotFound, "unknown protocol: " + name);
}

std::vector<double> Stage1Scores(const synth::Corpus& corpus, const app::PipelineConfig& cfg) {
  std::vector<double> scores(corpus.entries.size(), -1.0);
  app::ParallelFor(static_cast<int>(corpus.entries.size()), [&](int i) {
    const synth::AirBonePair p = app::FetchPair(corpus, corpus.entries[i]);
    try {
      scores[i] = app::RunStage1(p.ac, signal::AccelRecord::FromWaveform(p.bc), cfg).tcs.score;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDegenerate) throw;
    }
  });
  return scores;
}

Report RunExperiment(const synth::Corpus& corpus, const app::PipelineConfig& cfg,
                     Protocol protocol, const ExperimentOptions& options) {
  Require(!corpus.entries.empty(), "experiment: empty corpus");
  switch (protocol) {
    case Protocol::kStage1NormalVsFalseTrigger:
      return Stage1Grouped(
          corpus, cfg, protocol, [](const CorpusEntry& e) { return Num(e.duration_s) + "s"; },
          IsFalseTrigger);
    case Protocol::kStage1NoiseGrid:
      return Stage1Grouped(
          corpus, cfg, protocol,
          [](const CorpusEntry& e) {
            return "ac=" + SnrLabel(e.scene.ac_snr_db) + "/bc=" + SnrLabel(e.scene.bc_snr_db);
          },
          IsFalseTrigger);
    case Protocol::kStage1AcousticAttacks: {
      const std::vector<double> scores = Stage1Scores(corpus, cfg);
      Report r;
      r.protocol = ProtocolName(protocol);
      std::vector<double> genuine;
      for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
        const CorpusEntry& e = corpus.entries[i];
        if (IsGenuine(e)) genuine.push_back(scores[i]);
        r.scores.push_back({e.pair_id, e.ground_truth, e.ground_truth, scores[i]});
      }
      Require(!genuine.empty(), "stage1_acoustic_attacks: corpus has no genuine pairs");
      for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
        const CorpusEntry& e = corpus.entries[i];
        if (IsGenuine(e)) continue;
        ScoreSet& s = r.sets[synth::AttackClassName(e.scene.attack)];
        s.label = synth::AttackClassName(e.scene.attack);
        s.impostor.push_back(scores[i]);
      }
      Require(!r.sets.empty(), "stage1_acoustic_attacks: corpus has no attack pairs");
      r.metrics = nlohmann::json::object();
      for (auto& [name, s] : r.sets) {
        s.genuine = genuine;
        r.metrics[name] = SetMetrics(s, cfg.tcs.threshold);
      }
      return r;
    }
    case Protocol::kStage2Verification:
      return Stage2Verification(corpus, cfg, options);
    case Protocol::kMachineDetection:
      return MachineDetection(corpus, cfg, options);
    case Protocol::kOverallStrictAggregation:
      return OverallStrict(corpus, cfg, options);
  }
  throw Error(ErrorKind::kInvalidArgument, "unhandled protocol");
}

void WriteReport(const std::filesystem::path& dir, const Report& report) {
  std::filesystem::create_directories(dir);
  nlohmann::json j = {{"protocol", report.protocol}, {"metrics", report.metrics}};
  if (!report.decisions.empty()) j["decisions"] = report.decisions;
  {
    std::ofstream out(dir / "report.json");
    if (!out) throw Error(ErrorKind::kIo, "cannot write report in " + dir.string());
    out << j.dump(2) << '\n';
  }
  std::ofstream csv(dir / "scores.csv");
  csv << "pair_id,group,label,score\n";
  csv.precision(17);
  for (const ScoreRow& s : report.scores) {
    csv << s.pair_id << ',' << s.group << ',' << s.label << ',' << s.score << '\n';
  }
  for (const auto& [g, s] : report.sets) WriteCurveFiles(dir, g, s);
}

}  // namespace bcauth::eval
