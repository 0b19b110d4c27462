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
#include <cmath>
#include <numbers>
#include <random>

#include "bcauth/error.h"
#include "bcauth/eval/metrics.h"
#include "bcauth/signal/filters.h"
#include "bcauth/synth/scene.h"
#include "bcauth/synth/vocal.h"
#include "bcauth/tcs/tcs.h"
#include "doctest.h"
#include "oracles.h"
#include "test_util.h"

namespace bcauth::tcs {
namespace {

using signal::RowMatrix;
using signal::Waveform;
using testing::OracleScore;
using testing::OracleStft;

synth::RenderedPair Pair(std::uint64_t seed, double seconds,
                         synth::AttackClass attack = synth::AttackClass::kNone,
                         std::optional<double> bc_snr = std::nullopt) {
  const synth::VocalModel m = synth::RandomVocalModel("s", seed);
  synth::SceneSpec s;
  s.attack = attack;
  s.bc_snr_db = bc_snr;
  s.condition = static_cast<synth::Condition>(seed % synth::kNumConditions);
  return synth::RenderPair(synth::SynthUtterance(m, seconds, seed), m, s, seed * 7 + 1);
}

RowMatrix RandomSpectrogram(std::mt19937_64& rng, int bins, int frames) {
  std::gamma_distribution<double> g(2.0, 1.0);
  RowMatrix m(bins, frames);
  for (int i = 0; i < bins; ++i) {
    for (int t = 0; t < frames; ++t) m(i, t) = g(rng);
  }
  return m;
}

TEST_CASE("identical AC and BC score 1") {
  const synth::RenderedPair p = Pair(1, 2.0);
  const TcsResult r = TcsScore(p.pair.ac, p.pair.ac, TcsConfig{});
  CHECK(r.score == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.accepted);
  CHECK(r.ac_bins.size() == 5);
  CHECK(r.bc_bins.size() == 5);
  CHECK(r.correlation.rows() == 5);
  CHECK(r.correlation.cols() == 5);
  CHECK(r.score == r.correlation.maxCoeff());
}

TEST_CASE("score matches an exhaustive oracle on coarse spectrograms") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> mn(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    // Coarse STFT: 4 ms windows, 1 ms overlap, 32-point FFT -> 17 bins.
    TcsConfig cfg;
    cfg.frame = signal::FrameSpec::FromOverlap(4.0, 1.0);
    cfg.M = mn(rng);
    cfg.N = mn(rng);
    cfg.rows = RowValue::kMagnitude;
    const double seconds = 1.0 + (trial % 3) * 0.25;
    Waveform ac, bc;
    if (trial % 2 == 0) {
      const synth::RenderedPair p = Pair(200 + trial, seconds, trial % 4 == 0
                                         ? synth::AttackClass::kFalseTrigger
                                         : synth::AttackClass::kNone);
      ac = p.pair.ac;
      bc = p.pair.bc;
    } else {
      ac = testing::WhiteNoise(static_cast<std::size_t>(8000 * seconds), 1.0, 8000, trial);
      const Waveform n = testing::WhiteNoise(ac.size(), 0.5, 8000, trial + 1000);
      bc = testing::Add(signal::ApplyFilter(ac, signal::FilterSpec::Lowpass(1500)), n);
    }
    const TcsResult r = TcsScore(ac, bc, cfg);
    const long double o =
        OracleScore(OracleStft(ac.samples(), 32, 24, 32), OracleStft(bc.samples(), 32, 24, 32),
                    cfg.M, cfg.N, cfg.silence_fraction);
    CHECK(std::abs(static_cast<long double>(r.score) - o) < 1e-12L);
  }
}

TEST_CASE("false-trigger pairs score below 0.4") {
  int below = 0;
  for (int seed = 0; seed < 200; ++seed) {
    const synth::RenderedPair p = Pair(1000 + seed, 4.0, synth::AttackClass::kFalseTrigger);
    const TcsResult r = TcsScore(p.pair.ac, p.pair.bc, TcsConfig{});
    below += r.score < 0.4;
    CHECK(r.accepted == (r.score > 0.4));
  }
  CHECK(below >= 190);
}

TEST_CASE("genuine 4 s pairs separate from false triggers") {
  std::vector<synth::RenderedPair> pairs;
  for (int i = 0; i < 200; ++i) {
    pairs.push_back(Pair(3000 + i, 4.0, i % 2 ? synth::AttackClass::kFalseTrigger
                                              : synth::AttackClass::kNone));
  }
  std::vector<LabeledPair> batch;
  for (const auto& p : pairs) {
    batch.push_back({&p.pair.ac, &p.pair.bc, p.pair.ground_truth == "genuine"});
  }
  const std::vector<double> scores = ScoreBatch(batch, TcsConfig{});
  eval::ScoreSet s;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (batch[i].genuine ? s.genuine : s.impostor).push_back(scores[i]);
    if (i % 37 == 0) {
      CHECK(scores[i] == TcsScore(*batch[i].ac, *batch[i].bc, TcsConfig{}).score);
    }
  }
  CHECK(eval::ComputeEer(s).eer <= 0.02);
}

TEST_CASE("score is invariant to positive scaling of either domain") {
  const synth::RenderedPair p = Pair(4, 3.0, synth::AttackClass::kNone, 5.0);
  const double s0 = TcsScore(p.pair.ac, p.pair.bc, TcsConfig{}).score;
  for (double a : {1e-3, 0.37, 12.0}) {
    CHECK(std::abs(TcsScore(p.pair.ac.Scaled(a), p.pair.bc, TcsConfig{}).score - s0) < 1e-9);
    CHECK(std::abs(TcsScore(p.pair.ac, p.pair.bc.Scaled(a), TcsConfig{}).score - s0) < 1e-9);
  }
}

TEST_CASE("enlarging M or N never lowers the score") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const RowMatrix a = RandomSpectrogram(rng, 20, 60);
    const RowMatrix b = RandomSpectrogram(rng, 20, 60);
    TcsConfig cfg;
    double prev = -2.0;
    for (int k = 1; k <= 20; ++k) {
      cfg.M = k;
      cfg.N = std::max(1, k / 2);
      const double s = ScoreSpectrograms(a, b, cfg).score;
      CHECK(s >= prev);
      prev = s;
    }
  }
}

TEST_CASE("order of equal-power bins does not change the score") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    // Integer magnitudes keep the power sums exact, so the tie is exact.
    RowMatrix a = RandomSpectrogram(rng, 12, 50).array().round() + 1.0;
    const RowMatrix b = RandomSpectrogram(rng, 12, 50);
    a.row(2) *= 4.0;
    a.row(7) = a.row(2).reverse();
    TcsConfig cfg;
    cfg.M = 3;
    cfg.N = 3;
    const TcsResult r = ScoreSpectrograms(a, b, cfg);
    CHECK(r.ac_bins[0] == 2);
    CHECK(r.ac_bins[1] == 7);
    RowMatrix swapped = a;
    swapped.row(2) = a.row(7);
    swapped.row(7) = a.row(2);
    CHECK(ScoreSpectrograms(swapped, b, cfg).score == r.score);
  }
}

TEST_CASE("appending silence to both signals leaves the score unchanged") {
  const synth::RenderedPair p = Pair(6, 2.0);
  const double s0 = TcsScore(p.pair.ac, p.pair.bc, TcsConfig{}).score;
  const auto pad = [](const Waveform& w, std::size_t n) {
    std::vector<double> x(w.samples().begin(), w.samples().end());
    x.resize(x.size() + n, 0.0);
    return Waveform(std::move(x), w.sample_rate());
  };
  for (std::size_t n : {32u, 800u, 8000u}) {
    CHECK(std::abs(TcsScore(pad(p.pair.ac, n), pad(p.pair.bc, n), TcsConfig{}).score - s0) <
          1e-9);
  }
}

TEST_CASE("score equal to the threshold is rejected") {
  const synth::RenderedPair p = Pair(7, 2.0);
  TcsConfig cfg;
  const double s = TcsScore(p.pair.ac, p.pair.bc, cfg).score;
  cfg.threshold = std::clamp(s, 0.0, 1.0);
  CHECK_FALSE(TcsScore(p.pair.ac, p.pair.bc, cfg).accepted);
}

TEST_CASE("scoring errors") {
  const synth::RenderedPair p = Pair(8, 2.0);
  const Waveform zero(std::vector<double>(p.pair.ac.size(), 0.0), 8000);
  try {
    TcsScore(p.pair.ac, zero, TcsConfig{});
    FAIL("expected no-voiced-content");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerate);
    CHECK(std::string(e.what()).find("no-voiced-content") != std::string::npos);
  }
  TcsConfig big;
  big.M = 40;
  CHECK_THROWS_AS(TcsScore(p.pair.ac, p.pair.bc, big), Error);
  const Waveform short_ac = p.pair.ac.Slice(0, 4000);
  CHECK_THROWS_AS(TcsScore(short_ac, p.pair.bc.Slice(0, 4000), TcsConfig{}), Error);
  CHECK_THROWS_AS(TcsScore(p.pair.ac, p.pair.bc.Slice(0, 12000), TcsConfig{}), Error);
  TcsConfig bad;
  bad.threshold = 1.5;
  CHECK_THROWS_AS(bad.Validate(), Error);
}

TEST_CASE("zero-variance rows correlate as 0") {
  RowMatrix a = RowMatrix::Constant(4, 30, 1.0);
  std::mt19937_64 rng(1);
  const RowMatrix b = RandomSpectrogram(rng, 4, 30);
  TcsConfig cfg;
  cfg.M = 2;
  cfg.N = 2;
  const TcsResult r = ScoreSpectrograms(a, b, cfg);
  CHECK(r.score == 0.0);
  CHECK(r.ac_bins == std::vector<int>{0, 1});
}

TEST_CASE("config and result JSON") {
  TcsConfig c;
  c.M = 3;
  c.rows = RowValue::kPower;
  c.frame = signal::FrameSpec::FromOverlap(8.0, 2.0);
  const TcsConfig back = nlohmann::json(c).get<TcsConfig>();
  CHECK(back.M == 3);
  CHECK(back.rows == RowValue::kPower);
  CHECK(back.frame.window_ms == 8.0);
  CHECK(back.frame.hop_ms == doctest::Approx(6.0));
  const synth::RenderedPair p = Pair(9, 2.0);
  const nlohmann::json j = TcsScore(p.pair.ac, p.pair.bc, c);
  CHECK(j["correlation_matrix"].size() == 3);
  CHECK(j["correlation_matrix"][0].size() == 5);
  CHECK(j.contains("accepted"));
}

TEST_CASE("grid search contracts") {
  std::vector<synth::RenderedPair> pairs;
  for (int i = 0; i < 40; ++i) {
    pairs.push_back(Pair(5000 + i, 2.0, i % 2 ? synth::AttackClass::kFalseTrigger
                                              : synth::AttackClass::kNone, 0.0));
  }
  std::vector<LabeledPair> dev;
  for (const auto& p : pairs) dev.push_back({&p.pair.ac, &p.pair.bc, p.pair.ground_truth == "genuine"});

  const std::vector<GridCandidate> grid = {{1, 1, 5.0}, {5, 5, 5.0}, {2, 3, 8.0}, {8, 8, 4.0}};
  const GridResult r = GridSearch(dev, grid);
  REQUIRE(r.eers.size() == grid.size());
  for (double e : r.eers) CHECK(r.best_eer <= e);

  // Equal EERs (all perfect on a clean corpus): smallest M+N wins.
  const GridResult tie = GridSearch(dev, {{5, 5, 5.0}, {3, 4, 5.0}, {4, 3, 4.0}});
  if (tie.eers[0] == tie.eers[1] && tie.eers[1] == tie.eers[2]) {
    CHECK(tie.best.M == 4);
    CHECK(tie.best.N == 3);
    CHECK(tie.best.frame.window_ms == 4.0);
  }
  const GridResult one = GridSearch(dev, {{2, 2, 6.0}});
  CHECK(one.best.M == 2);
  CHECK(one.best.frame.window_ms == 6.0);
  CHECK(one.best.frame.hop_ms == doctest::Approx(5.0));

  std::vector<LabeledPair> single(dev.begin(), dev.begin() + 1);
  CHECK_THROWS_AS(GridSearch(single, grid), Error);
}

}  // namespace
}  // namespace bcauth::tcs
