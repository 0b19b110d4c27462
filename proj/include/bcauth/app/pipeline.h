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

#ifndef BCAUTH_APP_PIPELINE_H_
#define BCAUTH_APP_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcauth/app/config.h"
#include "bcauth/bcsr/detector.h"
#include "bcauth/bcsr/model.h"
#include "bcauth/bcsr/speaker.h"
#include "bcauth/bcsr/template_store.h"
#include "bcauth/signal/audio_io.h"
#include "bcauth/synth/corpus.h"
#include "json.hpp"

namespace bcauth::app {

// Rendered in memory when the corpus has no root, read from disk otherwise.
synth::AirBonePair FetchPair(const synth::Corpus& corpus, const synth::CorpusEntry& e);

// Runs body(i) for i in [0, n) across threads and rethrows the first failure.
void ParallelFor(int n, const std::function<void(int)>& body);

struct Stage1Outcome {
  init::InitResult init;
  tcs::TcsResult tcs;
};

Stage1Outcome RunStage1(const signal::Waveform& ac, const signal::AccelRecord& bc,
                        const PipelineConfig& cfg);

// Stage II feature of a raw pair: BC preprocessing, then the CQT feature.
bcsr::BcFeature PairFeature(const synth::AirBonePair& pair, const init::InitConfig& init,
                            const bcsr::FeatureExtractor& extractor);

struct Stage2Engine {
  bcsr::Model model;
  bcsr::FeatureExtractor extractor;
  std::optional<bcsr::MachineDetector> detector;

  static Stage2Engine Load(const PipelineConfig& cfg);
};

struct Stage2Outcome {
  Stage2Mode mode = Stage2Mode::kVerify;
  double score = 0.0;  // cosine (verify) or top softmax (identify)
  double threshold = 0.0;
  std::string identified;  // identify mode only
  std::optional<double> machine_score;
  bool machine = false;
  bool accepted = false;
};

struct DecisionRecord {
  std::string pair_id;
  std::string user_id;
  double stage1_score = 0.0;
  double stage1_threshold = 0.0;
  bool stage1_accepted = false;
  int estimated_delay_samples = 0;
  std::optional<Stage2Outcome> stage2;  // absent when Stage I rejected
  bool final_decision = false;
  std::map<std::string, double> timings_ms;  // empty unless requested
};

void to_json(nlohmann::json& j, const DecisionRecord& r);

// Stage II on an initialized BC stream: verification against tmpl (or
// identification), vetoed by the machine detector when enabled.
Stage2Outcome RunStage2(const signal::Waveform& bc, const std::string& user_id,
                        const PipelineConfig& cfg, const Stage2Engine& engine,
                        const bcsr::Template* tmpl);

// Stage I, then (only if it accepts) Stage II; final = both accept. tmpl is
// required in verify mode. Stage errors carry the stage name.
DecisionRecord Authenticate(const signal::Waveform& ac, const signal::AccelRecord& bc,
                            const std::string& user_id, const PipelineConfig& cfg,
                            const Stage2Engine& engine, const bcsr::Template* tmpl,
                            const std::string& pair_id = "", bool timings = false);

// File front end: looks the user up in the template store first.
DecisionRecord AuthenticateFiles(const std::filesystem::path& ac_file,
                                 const std::filesystem::path& bc_file,
                                 const std::string& user_id, const PipelineConfig& cfg,
                                 const Stage2Engine& engine, bool timings = false);

struct TrainingOutcome {
  bcsr::Model model;
  bcsr::TrainLog log;
  std::optional<bcsr::TrainLog> pretrain_log;
  double dev_identification_accuracy = 0.0;
  double dev_eer = 0.0;
  double threshold = 0.0;  // cosine EER threshold on dev embeddings
  std::optional<bcsr::MachineDetector> detector;
  nlohmann::json Report() const;
};

using ProgressFn = std::function<void(const std::string&)>;

// Trains on the genuine entries of corpus (the last dev_fraction of each
// speaker's utterances held out), calibrates the cosine threshold on the
// held-out embeddings and, when the corpus has crossdomain_machine entries,
// fits the machine detector. pretrain, when given, is a corpus whose clean
// AC speech is used for a first pass before fine-tuning on BC.
TrainingOutcome TrainPipeline(const synth::Corpus& corpus, const PipelineConfig& cfg,
                              const synth::Corpus* pretrain = nullptr,
                              const ProgressFn& progress = {});

// Writes the checkpoint and (if any) the detector next to it.
void SaveTrainingOutcome(const TrainingOutcome& t, const PipelineConfig& cfg);

}  // namespace bcauth::app

#endif  // BCAUTH_APP_PIPELINE_H_
