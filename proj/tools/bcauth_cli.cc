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

// Command-line front end. Exit codes: 0 success, 1 authentication or
// verification denied, 2 usage, I/O or pipeline error (JSON on stderr).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcauth/app/config.h"
#include "bcauth/app/pipeline.h"
#include "bcauth/bcsr/template_store.h"
#include "bcauth/error.h"
#include "bcauth/eval/experiments.h"
#include "bcauth/signal/audio_io.h"
#include "bcauth/synth/corpus.h"
#include "json.hpp"

namespace {

using namespace bcauth;
using nlohmann::json;

constexpr int kDenied = 1;
constexpr int kFailure = 2;

void PrintJson(const json& j) { std::cout << j.dump(2) << std::endl; }

void PrintError(const std::string& kind, const std::string& message,
                const std::string& stage = "") {
  json e = {{"kind", kind}, {"message", message}};
  if (!stage.empty()) e["stage"] = stage;
  std::cerr << json{{"error", e}}.dump() << std::endl;
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, path + ": " + e.what());
  }
}

struct Globals {
  std::string config;
  app::PipelineConfig Load() const {
    return config.empty() ? app::DefaultPipelineConfig() : app::LoadPipelineConfig(config);
  }
};

signal::Waveform LoadBc(const std::string& path, const init::InitConfig& cfg) {
  return init::PreprocessBc(signal::ReadAccel(path), cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Two-stage air/bone conduction voice authentication"};
  cli.require_subcommand(1);
  Globals g;
  cli.add_option("--config", g.config, "Pipeline configuration JSON");

  // synth
  auto* synth_cmd = cli.add_subcommand("synth", "Generate a synthetic AC/BC corpus");
  std::string synth_out, synth_mix;
  int synth_speakers = 8, synth_utts = 10;
  std::uint64_t synth_seed = 1;
  double synth_duration = 8.0;
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--speakers", synth_speakers, "Number of speakers");
  synth_cmd->add_option("--utterances", synth_utts, "Utterances per speaker");
  synth_cmd->add_option("--seed", synth_seed, "Corpus seed");
  synth_cmd->add_option("--duration", synth_duration, "Seconds per pair (genuine-only mix)");
  synth_cmd->add_option("--mix", synth_mix, "Scene mix JSON (array of templates)");

  // init
  auto* init_cmd = cli.add_subcommand("init", "Preprocess and align one AC/BC pair");
  std::string init_ac, init_bc, init_out_ac, init_out_bc;
  init_cmd->add_option("--ac", init_ac, "AC WAV")->required();
  init_cmd->add_option("--bc", init_bc, "BC recording (WAV, CSV or binary sidecar)")->required();
  init_cmd->add_option("--out-ac", init_out_ac, "Write aligned AC WAV");
  init_cmd->add_option("--out-bc", init_out_bc, "Write aligned BC WAV");

  // tcs
  auto* tcs_cmd = cli.add_subcommand("tcs", "Stage I temporal consistency score");
  std::string tcs_ac, tcs_bc;
  tcs_cmd->add_option("--ac", tcs_ac, "AC WAV")->required();
  tcs_cmd->add_option("--bc", tcs_bc, "BC recording")->required();

  // train
  auto* train_cmd = cli.add_subcommand("train", "Train the Stage II network");
  std::string train_corpus, train_pretrain, train_report;
  std::optional<int> train_epochs;
  train_cmd->add_option("--corpus", train_corpus, "Training corpus directory")->required();
  train_cmd->add_option("--pretrain-corpus", train_pretrain,
                        "Corpus whose clean AC speech is used for pretraining");
  train_cmd->add_option("--epochs", train_epochs, "Override the configured epoch count");
  train_cmd->add_option("--report", train_report, "Write the training report JSON here");

  // enroll
  auto* enroll_cmd = cli.add_subcommand("enroll", "Enroll a user from BC clips");
  std::string enroll_user;
  std::vector<std::string> enroll_clips;
  enroll_cmd->add_option("--user", enroll_user, "User id")->required();
  enroll_cmd->add_option("--clips", enroll_clips, "BC clips (>= 8 s each)")->required();

  // verify
  auto* verify_cmd = cli.add_subcommand("verify", "Verify a BC probe against a template");
  std::string verify_user, verify_probe;
  verify_cmd->add_option("--user", verify_user, "User id")->required();
  verify_cmd->add_option("--probe", verify_probe, "BC probe")->required();

  // identify
  auto* identify_cmd = cli.add_subcommand("identify", "Closed-set identification of a BC probe");
  std::string identify_probe;
  identify_cmd->add_option("--probe", identify_probe, "BC probe")->required();

  // detect-machine
  auto* detect_cmd =
      cli.add_subcommand("detect-machine", "Fit and evaluate the machine-spoof detector");
  std::string detect_corpus, detect_out;
  detect_cmd->add_option("--corpus", detect_corpus, "Corpus with machine pairs")->required();
  detect_cmd->add_option("--out", detect_out, "Report directory");

  // eval
  auto* eval_cmd = cli.add_subcommand("eval", "Run an evaluation protocol");
  std::string eval_protocol, eval_corpus, eval_out;
  eval_cmd->add_option("--protocol", eval_protocol, "Protocol name")->required();
  eval_cmd->add_option("--corpus", eval_corpus, "Corpus directory")->required();
  eval_cmd->add_option("--out", eval_out, "Report directory")->required();

  // authenticate
  auto* auth_cmd = cli.add_subcommand("authenticate", "Two-stage authentication of one pair");
  std::string auth_ac, auth_bc, auth_user, auth_mode;
  bool auth_timings = false;
  auth_cmd->add_option("--ac", auth_ac, "AC WAV")->required();
  auth_cmd->add_option("--bc", auth_bc, "BC recording")->required();
  auth_cmd->add_option("--user", auth_user, "Claimed user id");
  auth_cmd->add_option("--mode", auth_mode, "verify or identify");
  auth_cmd->add_flag("--timings", auth_timings, "Include per-stage timings");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("usage", e.what());
    return kFailure;
  }

  try {
    if (*synth_cmd) {
      const synth::SceneMix mix = synth_mix.empty()
                                      ? synth::GenuineOnlyMix(synth_duration)
                                      : synth::ParseSceneMix(ReadJsonFile(synth_mix));
      const synth::Corpus c =
          synth::BuildCorpus(synth_out, synth_speakers, synth_utts, mix, synth_seed);
      PrintJson({{"corpus", synth_out}, {"pairs", c.entries.size()}, {"speakers", c.speakers.size()}});
      return 0;
    }
    const app::PipelineConfig cfg = g.Load();
    if (*init_cmd) {
      const init::InitResult r =
          init::Initialize(signal::ReadWav(init_ac), signal::ReadAccel(init_bc), cfg.init);
      if (!init_out_ac.empty()) signal::WriteWav(init_out_ac, r.ac, signal::WavFormat::kFloat32);
      if (!init_out_bc.empty()) signal::WriteWav(init_out_bc, r.bc, signal::WavFormat::kFloat32);
      PrintJson(init::InitRecordJson(r, cfg.init));
      return 0;
    }
    if (*tcs_cmd) {
      const app::Stage1Outcome r =
          app::RunStage1(signal::ReadWav(tcs_ac), signal::ReadAccel(tcs_bc), cfg);
      PrintJson(r.tcs);
      return 0;
    }
    if (*train_cmd) {
      app::PipelineConfig c = cfg;
      if (train_epochs) c.train.epochs = *train_epochs;
      const synth::Corpus corpus = synth::LoadCorpus(train_corpus);
      std::optional<synth::Corpus> pre;
      if (!train_pretrain.empty()) {
        pre = synth::LoadCorpus(train_pretrain);
        if (c.pretrain_epochs == 0) c.pretrain_epochs = c.train.epochs;
      }
      const app::TrainingOutcome t = app::TrainPipeline(
          corpus, c, pre ? &*pre : nullptr, [](const std::string& s) { std::cerr << s << '\n'; });
      app::SaveTrainingOutcome(t, c);
      const json report = t.Report();
      if (!train_report.empty()) {
        std::ofstream out(train_report);
        out << report.dump(2) << '\n';
      }
      PrintJson({{"model", c.paths.model.string()},
                 {"dev_identification_accuracy", t.dev_identification_accuracy},
                 {"dev_eer", t.dev_eer},
                 {"threshold", t.threshold},
                 {"machine_detector", t.detector.has_value()}});
      return 0;
    }
    if (*enroll_cmd) {
      const app::Stage2Engine eng = app::Stage2Engine::Load(cfg);
      std::vector<signal::Waveform> clips;
      for (const auto& f : enroll_clips) clips.push_back(LoadBc(f, cfg.init));
      const bcsr::Template t =
          bcsr::EnrollClips(enroll_user, clips, eng.extractor, eng.model.net, cfg.stage2.layer);
      bcsr::TemplateStore(cfg.paths.template_store).Put(t);
      PrintJson({{"user_id", t.user_id},
                 {"layer_tag", bcsr::LayerTagName(t.mean.tag)},
                 {"enrollment_seconds", t.enrollment_seconds},
                 {"store", cfg.paths.template_store.string()}});
      return 0;
    }
    if (*verify_cmd) {
      const bcsr::Template t = bcsr::TemplateStore(cfg.paths.template_store).Get(verify_user);
      const app::Stage2Engine eng = app::Stage2Engine::Load(cfg);
      app::PipelineConfig c = cfg;
      c.stage2.mode = app::Stage2Mode::kVerify;
      const app::Stage2Outcome s =
          app::RunStage2(LoadBc(verify_probe, cfg.init), verify_user, c, eng, &t);
      PrintJson({{"user_id", verify_user},
                 {"score", s.score},
                 {"threshold", s.threshold},
                 {"machine", s.machine},
                 {"accepted", s.accepted}});
      return s.accepted ? 0 : kDenied;
    }
    if (*identify_cmd) {
      const app::Stage2Engine eng = app::Stage2Engine::Load(cfg);
      const bcsr::Identification id = bcsr::Identify(
          eng.model.net, eng.extractor.Extract(LoadBc(identify_probe, cfg.init)));
      PrintJson({{"speaker_id", id.speaker_id},
                 {"speaker_ids", eng.model.net.spec().speaker_ids},
                 {"scores", id.scores}});
      return 0;
    }
    if (*detect_cmd) {
      const app::Stage2Engine eng = app::Stage2Engine::Load(cfg);
      eval::ExperimentOptions o;
      o.engine = &eng;
      const eval::Report r = eval::RunExperiment(synth::LoadCorpus(detect_corpus), cfg,
                                                 eval::Protocol::kMachineDetection, o);
      if (!detect_out.empty()) eval::WriteReport(detect_out, r);
      const auto det_path = cfg.paths.DetectorPath();
      std::ofstream out(det_path);
      if (!out) throw Error(ErrorKind::kIo, "cannot write " + det_path.string());
      out << json(*r.detector).dump(2) << '\n';
      PrintJson(r.metrics);
      return 0;
    }
    if (*eval_cmd) {
      const eval::Protocol p = eval::ParseProtocol(eval_protocol);
      std::optional<app::Stage2Engine> eng;
      eval::ExperimentOptions o;
      if (p == eval::Protocol::kStage2Verification || p == eval::Protocol::kMachineDetection ||
          p == eval::Protocol::kOverallStrictAggregation) {
        eng = app::Stage2Engine::Load(cfg);
        o.engine = &*eng;
      }
      const eval::Report r = eval::RunExperiment(synth::LoadCorpus(eval_corpus), cfg, p, o);
      eval::WriteReport(eval_out, r);
      PrintJson(r.metrics);
      return 0;
    }
    if (*auth_cmd) {
      app::PipelineConfig c = cfg;
      if (!auth_mode.empty()) c.stage2.mode = app::ParseStage2Mode(auth_mode);
      if (c.stage2.mode == app::Stage2Mode::kVerify && auth_user.empty()) {
        PrintError("usage", "--user is required in verify mode");
        return kFailure;
      }
      const app::Stage2Engine eng = app::Stage2Engine::Load(c);
      const app::DecisionRecord d =
          app::AuthenticateFiles(auth_ac, auth_bc, auth_user, c, eng, auth_timings);
      PrintJson(d);
      return d.final_decision ? 0 : kDenied;
    }
  } catch (const Error& e) {
    PrintError(ErrorKindName(e.kind()), e.what(), e.stage());
    return kFailure;
  } catch (const std::exception& e) {
    PrintError("internal", e.what());
    return kFailure;
  }
  return kFailure;
}
