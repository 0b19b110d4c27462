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

#ifndef BCAUTH_EVAL_EXPERIMENTS_H_
#define BCAUTH_EVAL_EXPERIMENTS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcauth/app/config.h"
#include "bcauth/app/pipeline.h"
#include "bcauth/bcsr/detector.h"
#include "bcauth/eval/metrics.h"
#include "bcauth/synth/corpus.h"
#include "json.hpp"

namespace bcauth::eval {

enum class Protocol {
  kStage1NormalVsFalseTrigger,
  kStage1NoiseGrid,
  kStage1AcousticAttacks,
  kStage2Verification,
  kMachineDetection,
  kOverallStrictAggregation,
};

const char* ProtocolName(Protocol p);
Protocol ParseProtocol(const std::string& name);
const std::vector<Protocol>& AllProtocols();

struct ScoreRow {
  std::string pair_id;
  std::string group;  // e.g. duration, SNR cell, enrollment preset
  std::string label;  // ground truth or genuine/impostor
  double score = 0.0;
};

struct Report {
  std::string protocol;
  nlohmann::json metrics;
  std::vector<ScoreRow> scores;
  std::map<std::string, ScoreSet> sets;  // per group, for ROC/histogram files
  std::vector<app::DecisionRecord> decisions;  // overall_strict_aggregation
  std::optional<bcsr::MachineDetector> detector;  // machine_detection (LDA)
};

struct ExperimentOptions {
  // Stage II protocols need a trained model.
  const app::Stage2Engine* engine = nullptr;
  // stage2_verification: enrollment presets as clip counts (8 s each).
  std::vector<int> enrollment_clips = {1, 3, 5};
  std::vector<bcsr::LayerTag> layers = {bcsr::LayerTag::kLayer1, bcsr::LayerTag::kLayer2,
                                        bcsr::LayerTag::kLayer3};
  // overall_strict_aggregation: genuine utterances used to enroll each user.
  int overall_enroll_clips = 3;
};

// Stage I scores of every entry in corpus order. Pairs with no usable BC
// content score -1.
std::vector<double> Stage1Scores(const synth::Corpus& corpus, const app::PipelineConfig& cfg);

// Deterministic for a fixed corpus and config.
Report RunExperiment(const synth::Corpus& corpus, const app::PipelineConfig& cfg,
                     Protocol protocol, const ExperimentOptions& options = {});

// report.json, scores.csv and per-group roc_<group>.dat / hist_<group>.dat
// (whitespace-separated columns, gnuplot friendly).
void WriteReport(const std::filesystem::path& dir, const Report& report);

}  // namespace bcauth::eval

#endif  // BCAUTH_EVAL_EXPERIMENTS_H_
