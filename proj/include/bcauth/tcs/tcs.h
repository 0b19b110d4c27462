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

#ifndef BCAUTH_TCS_TCS_H_
#define BCAUTH_TCS_TCS_H_

#include <string>
#include <vector>

#include "bcauth/signal/spectrogram.h"
#include "bcauth/signal/waveform.h"
#include "json.hpp"

namespace bcauth::tcs {

// What the rows of the correlation matrix hold. Marginals always use power.
enum class RowValue { kMagnitude, kPower };

struct TcsConfig {
  int M = 5;
  int N = 5;
  signal::FrameSpec frame = signal::FrameSpec::FromOverlap(5.0, 1.0);
  std::size_t fft_size = 0;  // 0: next power of two >= window
  double silence_fraction = 0.02;
  double threshold = 0.4;
  RowValue rows = RowValue::kMagnitude;

  // bins == 0 skips the M/N upper bound.
  void Validate(std::size_t bins = 0) const;
};

void to_json(nlohmann::json& j, const TcsConfig& c);
void from_json(const nlohmann::json& j, TcsConfig& c);

struct TcsResult {
  double score = 0.0;
  std::vector<int> ac_bins;  // descending marginal power
  std::vector<int> bc_bins;
  signal::RowMatrix correlation;  // M x N
  bool accepted = false;          // score > threshold
  int first_frame = 0;            // kept interval [first_frame, last_frame]
  int last_frame = 0;
};

void to_json(nlohmann::json& j, const TcsResult& r);

// Scores two magnitude spectrograms with equal frame counts.
TcsResult ScoreSpectrograms(const signal::RowMatrix& ac_mag,
                            const signal::RowMatrix& bc_mag, const TcsConfig& cfg);

// Initialized pair: equal rates and lengths, at least 1 s.
TcsResult TcsScore(const signal::Waveform& ac, const signal::Waveform& bc,
                   const TcsConfig& cfg);

struct LabeledPair {
  const signal::Waveform* ac;
  const signal::Waveform* bc;
  bool genuine;
};

// Scores in input order; parallel across pairs.
std::vector<double> ScoreBatch(const std::vector<LabeledPair>& pairs,
                               const TcsConfig& cfg);

struct GridCandidate {
  int M;
  int N;
  double window_ms;
};

struct GridResult {
  TcsConfig best;
  double best_eer = 0.0;
  std::vector<double> eers;  // per candidate, in grid order
};

// Window candidates keep base.frame's overlap. Ties in EER go to smaller
// M + N, then to the smaller window.
GridResult GridSearch(const std::vector<LabeledPair>& dev,
                      const std::vector<GridCandidate>& grid,
                      const TcsConfig& base = {});

}  // namespace bcauth::tcs

#endif  // BCAUTH_TCS_TCS_H_
