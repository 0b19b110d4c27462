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

#include "bcauth/tcs/tcs.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "bcauth/error.h"
#include "bcauth/eval/metrics.h"
#include "bcauth/signal/stats.h"

namespace bcauth::tcs {
namespace {

using signal::RowMatrix;

// Indices of the k largest values, descending; ties to the lower index.
std::vector<int> TopK(const Eigen::VectorXd& v, int k) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return v[a] > v[b]; });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

signal::FrameSpec WithWindow(const signal::FrameSpec& f, double window_ms) {
  const double overlap = f.window_ms - f.hop_ms;
  return signal::FrameSpec::FromOverlap(window_ms, overlap, f.window);
}

}  // namespace

void TcsConfig::Validate(std::size_t bins) const {
  Require(M >= 1 && N >= 1, "tcs: M and N must be >= 1");
  if (bins > 0) {
    Require(static_cast<std::size_t>(M) <= bins &&
                static_cast<std::size_t>(N) <= bins,
            "tcs: M and N must not exceed the bin count");
  }
  Require(silence_fraction > 0.0 && silence_fraction < 1.0,
          "tcs: silence_fraction must be in (0, 1)");
  Require(threshold >= 0.0 && threshold <= 1.0, "tcs: threshold must be in [0, 1]");
}

void to_json(nlohmann::json& j, const TcsConfig& c) {
  j = {{"M", c.M},
       {"N", c.N},
       {"window_ms", c.frame.window_ms},
       {"overlap_ms", c.frame.window_ms - c.frame.hop_ms},
       {"window", signal::WindowFunctionName(c.frame.window)},
       {"fft_size", c.fft_size},
       {"silence_fraction", c.silence_fraction},
       {"threshold", c.threshold},
       {"rows", c.rows == RowValue::kMagnitude ? "magnitude" : "power"}};
}

void from_json(const nlohmann::json& j, TcsConfig& c) {
  const TcsConfig d;
  c.M = j.value("M", d.M);
  c.N = j.value("N", d.N);
  c.frame = signal::FrameSpec::FromOverlap(
      j.value("window_ms", d.frame.window_ms),
      j.value("overlap_ms", d.frame.window_ms - d.frame.hop_ms),
      signal::ParseWindowFunction(j.value("window", std::string("hann"))));
  c.fft_size = j.value("fft_size", d.fft_size);
  c.silence_fraction = j.value("silence_fraction", d.silence_fraction);
  c.threshold = j.value("threshold", d.threshold);
  const std::string rows = j.value("rows", std::string("magnitude"));
  Require(rows == "magnitude" || rows == "power",
          "tcs: rows must be 'magnitude' or 'power'");
  c.rows = rows == "magnitude" ? RowValue::kMagnitude : RowValue::kPower;
}

void to_json(nlohmann::json& j, const TcsResult& r) {
  nlohmann::json matrix = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.correlation.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < r.correlation.cols(); ++k) {
      row.push_back(r.correlation(i, k));
    }
    matrix.push_back(row);
  }
  j = {{"score", r.score},
       {"ac_bins", r.ac_bins},
       {"bc_bins", r.bc_bins},
       {"correlation_matrix", matrix},
       {"accepted", r.accepted},
       {"frames_kept", {r.first_frame, r.last_frame}}};
}

TcsResult ScoreSpectrograms(const RowMatrix& ac_mag, const RowMatrix& bc_mag,
                            const TcsConfig& cfg) {
  Require(ac_mag.cols() == bc_mag.cols(),
          "tcs: AC and BC spectrograms differ in frame count");
  cfg.Validate(static_cast<std::size_t>(std::min(ac_mag.rows(), bc_mag.rows())));
  const RowMatrix ac_pow = ac_mag.array().square();
  const RowMatrix bc_pow = bc_mag.array().square();

  // Steps 1-2: trim leading and trailing BC frames below the silence level.
  const Eigen::VectorXd frame_power = bc_pow.colwise().sum().transpose();
  const double floor = cfg.silence_fraction * frame_power.maxCoeff();
  Eigen::Index first = 0, last = frame_power.size() - 1;
  while (first <= last && !(frame_power[first] >= floor && frame_power[first] > 0.0)) ++first;
  while (last >= first && !(frame_power[last] >= floor && frame_power[last] > 0.0)) --last;
  if (last - first + 1 < 2) {
    throw Error(ErrorKind::kDegenerate, "no-voiced-content: fewer than two BC frames "
                                        "remain after silence trimming", "tcs");
  }
  const Eigen::Index kept = last - first + 1;

  // Steps 3-4: per-bin power marginals over the kept frames, top-M and top-N.
  const Eigen::VectorXd ac_marg = ac_pow.middleCols(first, kept).rowwise().sum();
  const Eigen::VectorXd bc_marg = bc_pow.middleCols(first, kept).rowwise().sum();
  TcsResult r;
  r.ac_bins = TopK(ac_marg, cfg.M);
  r.bc_bins = TopK(bc_marg, cfg.N);
  r.first_frame = static_cast<int>(first);
  r.last_frame = static_cast<int>(last);

  // Steps 5-6: Pearson over the kept frames, S = max.
  const RowMatrix& ac_rows = cfg.rows == RowValue::kMagnitude ? ac_mag : ac_pow;
  const RowMatrix& bc_rows = cfg.rows == RowValue::kMagnitude ? bc_mag : bc_pow;
  r.correlation.resize(cfg.M, cfg.N);
  const auto row = [&](const RowMatrix& m, int bin) {
    return std::span<const double>(m.data() + bin * m.cols() + first,
                                   static_cast<std::size_t>(kept));
  };
  for (int i = 0; i < cfg.M; ++i) {
    for (int k = 0; k < cfg.N; ++k) {
      r.correlation(i, k) =
          signal::Pearson(row(ac_rows, r.ac_bins[i]), row(bc_rows, r.bc_bins[k]));
    }
  }
  r.score = r.correlation.maxCoeff();
  r.accepted = r.score > cfg.threshold;
  return r;
}

TcsResult TcsScore(const signal::Waveform& ac, const signal::Waveform& bc,
                   const TcsConfig& cfg) {
  Require(ac.sample_rate() == bc.sample_rate(), "tcs: AC and BC sample rates differ");
  Require(ac.size() == bc.size(), "tcs: pair is not aligned (lengths differ)");
  Require(ac.duration_seconds() >= 1.0, "tcs: utterance shorter than 1 s");
  cfg.Validate();
  const signal::Spectrogram a = signal::Stft(ac, cfg.frame, cfg.fft_size);
  const signal::Spectrogram b = signal::Stft(bc, cfg.frame, cfg.fft_size);
  return ScoreSpectrograms(a.magnitudes, b.magnitudes, cfg);
}

std::vector<double> ScoreBatch(const std::vector<LabeledPair>& pairs,
                               const TcsConfig& cfg) {
  std::vector<double> scores(pairs.size());
  std::vector<std::string> errors(pairs.size());
  const long n = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      scores[i] = TcsScore(*pairs[i].ac, *pairs[i].bc, cfg).score;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "pair " + std::to_string(i) + ": " + errors[i], "tcs");
    }
  }
  return scores;
}

GridResult GridSearch(const std::vector<LabeledPair>& dev,
                      const std::vector<GridCandidate>& grid,
                      const TcsConfig& base) {
  Require(!grid.empty(), "tcs grid search: empty grid");
  const bool has_pos = std::any_of(dev.begin(), dev.end(),
                                   [](const LabeledPair& p) { return p.genuine; });
  const bool has_neg = std::any_of(dev.begin(), dev.end(),
                                   [](const LabeledPair& p) { return !p.genuine; });
  Require(has_pos && has_neg,
          "tcs grid search: dev corpus needs genuine and false-trigger pairs");

  // Spectrograms depend only on the window, so compute them once per window.
  std::map<double, std::vector<std::pair<RowMatrix, RowMatrix>>> spectra;
  for (const GridCandidate& c : grid) {
    if (spectra.count(c.window_ms)) continue;
    const signal::FrameSpec f = WithWindow(base.frame, c.window_ms);
    auto& v = spectra[c.window_ms];
    v.resize(dev.size());
    const long n = static_cast<long>(dev.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
      v[i] = {signal::Stft(*dev[i].ac, f, base.fft_size).magnitudes,
              signal::Stft(*dev[i].bc, f, base.fft_size).magnitudes};
    }
  }

  GridResult out;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    TcsConfig cfg = base;
    cfg.M = grid[g].M;
    cfg.N = grid[g].N;
    cfg.frame = WithWindow(base.frame, grid[g].window_ms);
    const auto& v = spectra.at(grid[g].window_ms);
    eval::ScoreSet s;
    s.label = "grid";
    for (std::size_t i = 0; i < dev.size(); ++i) {
      const double score = ScoreSpectrograms(v[i].first, v[i].second, cfg).score;
      (dev[i].genuine ? s.genuine : s.impostor).push_back(score);
    }
    out.eers.push_back(eval::ComputeEer(s).eer);
    const auto key = [&](std::size_t k) {
      return std::make_tuple(out.eers[k], grid[k].M + grid[k].N, grid[k].window_ms);
    };
    if (g == 0 || key(g) < key(best)) best = g;
  }
  out.best = base;
  out.best.M = grid[best].M;
  out.best.N = grid[best].N;
  out.best.frame = WithWindow(base.frame, grid[best].window_ms);
  out.best_eer = out.eers[best];
  return out;
}

}  // namespace bcauth::tcs
