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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>

#include "bcauth/error.h"
#include "bcauth/signal/resample.h"
#include "bcauth/signal/spectrogram.h"
#include "bcauth/signal/stats.h"
#include "bcauth/synth/corpus.h"
#include "bcauth/synth/machine.h"
#include "bcauth/synth/scene.h"
#include "bcauth/synth/vocal.h"
#include "doctest.h"
#include "test_util.h"

namespace bcauth::synth {
namespace {

namespace fs = std::filesystem;
using signal::Waveform;
using testing::AveragedPowerSpectrum;
using testing::BandFraction;

VocalModel Model(double f0 = 120.0, std::uint64_t seed = 3) {
  VocalModel m = RandomVocalModel("u", seed);
  m.pitch_f0 = f0;
  return m;
}

bool Identical(const Waveform& a, const Waveform& b) {
  return a.sample_rate() == b.sample_rate() &&
         std::equal(a.samples().begin(), a.samples().end(), b.samples().begin(),
                    b.samples().end());
}

std::vector<double> FrameEnergies(std::span<const double> x, std::size_t frame) {
  std::vector<double> e;
  for (std::size_t s = 0; s + frame <= x.size(); s += frame) {
    double v = 0.0;
    for (std::size_t i = 0; i < frame; ++i) v += x[s + i] * x[s + i];
    e.push_back(v);
  }
  return e;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST_CASE("utterance synthesis is deterministic and sized by duration") {
  const VocalModel m = Model();
  const Waveform a = SynthUtterance(m, 4.0, 11);
  const Waveform b = SynthUtterance(m, 4.0, 11);
  CHECK(a.size() == 32000);
  CHECK(a.sample_rate() == 8000);
  CHECK(Identical(a, b));
  CHECK_FALSE(Identical(a, SynthUtterance(m, 4.0, 12)));
}

TEST_CASE("utterance synthesis rejects out-of-range durations") {
  const VocalModel m = Model();
  CHECK_THROWS_AS(SynthUtterance(m, 0.0, 1), Error);
  CHECK_THROWS_AS(SynthUtterance(m, -2.0, 1), Error);
  CHECK_THROWS_AS(SynthUtterance(m, 0.5, 1), Error);
  CHECK_THROWS_AS(SynthUtterance(m, 31.0, 1), Error);
}

TEST_CASE("vocal model validation") {
  VocalModel m = Model();
  CHECK_NOTHROW(m.Validate());
  m.pitch_f0 = 50.0;
  CHECK_THROWS_AS(m.Validate(), Error);
  m = Model();
  m.bc_channel.lowpass_cutoff = 2500.0;
  CHECK_THROWS_AS(m.Validate(), Error);
  m = Model();
  m.bc_channel.attenuation_profile[2] = 0.0;
  CHECK_THROWS_AS(m.Validate(), Error);
  m = Model();
  m.formants[0].center_hz = 4200.0;
  CHECK_THROWS_AS(m.Validate(), Error);
}

TEST_CASE("voiced frames show harmonics of the pitch") {
  const Waveform x = SynthUtterance(Model(120.0), 6.0, 5);
  constexpr std::size_t kSeg = 512;  // 15.6 Hz bins
  const double df = 8000.0 / kSeg;
  const std::vector<double> energy = FrameEnergies(x.samples(), kSeg);
  const double mean = std::accumulate(energy.begin(), energy.end(), 0.0) / energy.size();
  int voiced = 0, harmonic = 0;
  for (std::size_t f = 0; f < energy.size(); ++f) {
    if (energy[f] < mean) continue;
    ++voiced;
    const std::vector<double> p =
        AveragedPowerSpectrum(x.samples().subspan(f * kSeg, kSeg), kSeg);
    // Fundamental: strongest bin in 80-170 Hz.
    std::size_t k0 = 0;
    for (std::size_t k = 1; k * df < 170.0; ++k) {
      if (k * df >= 80.0 && (k0 == 0 || p[k] > p[k0])) k0 = k;
    }
    const double f0 = k0 * df;
    bool ok = std::abs(f0 - 120.0) < 0.2 * 120.0;
    for (int h = 2; h <= 3 && ok; ++h) {
      const auto at = [&](double hz) {
        const auto k = static_cast<std::size_t>(std::lround(hz / df));
        return std::max({p[k - 1], p[k], p[k + 1]});
      };
      ok = at(h * f0) > 4.0 * p[static_cast<std::size_t>(std::lround((h + 0.5) * f0 / df))];
    }
    harmonic += ok;
  }
  REQUIRE(voiced > 10);
  CHECK(harmonic >= 0.8 * voiced);
}

TEST_CASE("utterances contain at least 10% unvoiced or silent frames") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const Waveform x = SynthUtterance(RandomVocalModel("s", seed), 8.0, seed);
    const std::vector<double> e = FrameEnergies(x.samples(), 256);
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / e.size();
    const auto quiet = std::count_if(e.begin(), e.end(),
                                     [&](double v) { return v < 0.05 * mean; });
    CHECK(static_cast<double>(quiet) / e.size() >= 0.10);
  }
}

TEST_CASE("clean genuine BC is band-limited") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const VocalModel m = RandomVocalModel("s", seed);
    const Waveform clear = SynthUtterance(m, 4.0, seed);
    const RenderedPair r = RenderPair(clear, m, SceneSpec{}, seed);
    CHECK(r.pair.ground_truth == "genuine");
    const auto psd = AveragedPowerSpectrum(r.pair.bc.samples());
    CHECK(BandFraction(psd, 8000, 2000.0, 4001.0) < 0.01);
    const auto clean = AveragedPowerSpectrum(r.bc_clean.samples());
    CHECK(BandFraction(clean, 8000, m.bc_channel.lowpass_cutoff, 4001.0) < 0.01);
  }
}

TEST_CASE("AC SNR matches the requested level") {
  const VocalModel m = Model();
  const Waveform clear = SynthUtterance(m, 4.0, 9);
  for (double snr : {-10.0, 0.0, 10.0}) {
    SceneSpec s;
    s.ac_snr_db = snr;
    const RenderedPair r = RenderPair(clear, m, s, 21);
    CHECK(std::abs(signal::SnrDb(r.ac_clean.samples(), r.pair.ac.samples()) - snr) < 0.5);
  }
}

TEST_CASE("false-trigger BC is uncorrelated with AC") {
  const signal::FrameSpec spec;  // 5 ms windows
  int pass = 0;
  constexpr int kSeeds = 200;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const VocalModel m = RandomVocalModel("s", 500 + seed);
    const Waveform clear = SynthUtterance(m, 4.0, seed);
    SceneSpec s;
    s.attack = AttackClass::kFalseTrigger;
    s.bc_snr_db = 0.0;
    s.condition = static_cast<Condition>(seed % kNumConditions);
    const RenderedPair r = RenderPair(clear, m, s, 1000 + seed);
    CHECK(r.pair.ground_truth == "false_trigger");
    const signal::Spectrogram a = signal::Stft(r.pair.ac, spec);
    const signal::Spectrogram b = signal::Stft(r.pair.bc, spec);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.magnitudes.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.magnitudes.rows(); ++j) {
        const auto ra = a.magnitudes.row(i);
        const auto rb = b.magnitudes.row(j);
        worst = std::max(worst, std::abs(signal::Pearson(
                                    {ra.data(), static_cast<std::size_t>(ra.size())},
                                    {rb.data(), static_cast<std::size_t>(rb.size())})));
      }
    }
    pass += worst < 0.3;
  }
  CHECK(pass >= 0.95 * kSeeds);
}

TEST_CASE("motion noise stays below 150 Hz") {
  for (int c = 0; c < kNumConditions; ++c) {
    const Waveform n = MotionNoise(static_cast<Condition>(c), 32000, 8000, 7 + c);
    CHECK(signal::Rms(n.samples()) == doctest::Approx(1.0));
    const auto psd = AveragedPowerSpectrum(n.samples(), 512);
    CHECK(BandFraction(psd, 8000, 200.0, 4001.0) < 0.01);
  }
}

TEST_CASE("genuine AC and BC share voiced onsets") {
  const VocalModel m = Model(140.0, 17);
  const RenderedPair r = RenderPair(SynthUtterance(m, 8.0, 4), m, SceneSpec{}, 4);
  constexpr std::size_t kFrame = 80;  // 10 ms
  const auto onsets = [&](std::span<const double> x) {
    const std::vector<double> e = FrameEnergies(x, kFrame);
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / e.size();
    std::vector<std::size_t> out;
    for (std::size_t i = 3; i < e.size(); ++i) {
      const bool quiet_before = e[i - 1] < 0.1 * mean && e[i - 2] < 0.1 * mean &&
                                e[i - 3] < 0.1 * mean;
      if (quiet_before && e[i] >= 0.1 * mean) out.push_back(i);
    }
    return out;
  };
  const auto ac = onsets(r.ac_clean.samples());
  const auto bc = onsets(r.bc_clean.samples());
  REQUIRE(ac.size() >= 5);
  CHECK(ac.size() == bc.size());
  for (std::size_t a : ac) {
    const bool matched = std::any_of(bc.begin(), bc.end(), [&](std::size_t b) {
      return std::abs(static_cast<long>(a) - static_cast<long>(b)) <= 2;
    });
    CHECK(matched);
  }
}

TEST_CASE("injected delay is the exact sample shift") {
  const VocalModel m = Model();
  const Waveform clear = SynthUtterance(m, 4.0, 2);
  SceneSpec s;
  s.bc_snr_db = 10.0;
  s.condition = Condition::kMoving;
  const RenderedPair base = RenderPair(clear, m, s, 8);
  for (int d : {-321, -1, 1, 57, 400}) {
    s.delay_samples = d;
    const RenderedPair r = RenderPair(clear, m, s, 8);
    CHECK(Identical(r.pair.ac, base.pair.ac));
    CHECK(Identical(r.pair.bc, Advance(base.pair.bc, d)));
    // AC lags BC by d: ac[n] lines up with bc[n - d].
    CHECK(r.pair.bc[1000 - d] == base.pair.bc[1000]);
  }
}

TEST_CASE("render rejects inconsistent scenes") {
  const VocalModel m = Model();
  const Waveform clear = SynthUtterance(m, 2.0, 2);
  SceneSpec s;
  s.attack = AttackClass::kAcousticReplay;
  CHECK_THROWS_AS(RenderPair(clear, m, s, 1), Error);
  s.attack = AttackClass::kCrossdomainImpersonation;
  CHECK_THROWS_AS(RenderPair(clear, m, s, 1, {clear, std::nullopt, std::nullopt}), Error);
  s.attack = AttackClass::kCrossdomainMachine;
  CHECK_THROWS_AS(RenderPair(clear, m, s, 1), Error);
  s.attack = AttackClass::kNone;
  s.delay_samples = 8000;
  CHECK_THROWS_AS(RenderPair(clear, m, s, 1), Error);
  s.delay_samples = 0;
  CHECK_THROWS_AS(RenderPair(signal::Resample(clear, 4000), m, s, 1), Error);
}

TEST_CASE("attack scenes substitute the documented sources") {
  const VocalModel user = RandomVocalModel("user", 1);
  const VocalModel attacker = RandomVocalModel("attacker", 2);
  const Waveform clear = SynthUtterance(user, 3.0, 1);
  const Waveform other = SynthUtterance(attacker, 3.0, 2);
  const Waveform retake = SynthUtterance(user, 3.0, 3);
  const AttackSources src{other, attacker, retake};
  const double user_bc = signal::Rms(ApplyBcChannel(clear, user.bc_channel).samples());

  SceneSpec s;
  s.attack = AttackClass::kAcousticImpersonation;
  RenderedPair r = RenderPair(clear, user, s, 3, src);
  CHECK(Identical(r.ac_clean, other));
  CHECK(signal::Rms(r.bc_clean.samples()) == 0.0);
  CHECK(signal::Rms(r.pair.bc.samples()) < 0.5 * user_bc);
  CHECK(r.pair.ground_truth == "attack:acoustic_impersonation");

  s.attack = AttackClass::kAcousticReplay;
  r = RenderPair(clear, user, s, 3, src);
  CHECK(signal::Rms(r.bc_clean.samples()) == 0.0);
  CHECK(std::abs(signal::Pearson(r.ac_clean.samples(), retake.samples())) > 0.3);

  s.attack = AttackClass::kCrossdomainImpersonation;
  r = RenderPair(clear, user, s, 3, src);
  CHECK(Identical(r.bc_clean, ApplyBcChannel(other, attacker.bc_channel)));

  s.attack = AttackClass::kCrossdomainMachine;
  s.device_profile = "phone";
  r = RenderPair(clear, user, s, 3, src);
  CHECK(Identical(r.ac_clean, clear));
  CHECK(signal::Rms(r.bc_clean.samples()) > 0.0);
  CHECK(r.pair.ground_truth == "attack:crossdomain_machine");
}

TEST_CASE("machine BC is deterministic and rejects unknown devices") {
  const Waveform src = SynthUtterance(Model(), 2.0, 1);
  CHECK(Identical(SynthMachineBc(src, "laptop", 4), SynthMachineBc(src, "laptop", 4)));
  CHECK_THROWS_AS(SynthMachineBc(src, "toaster", 4), Error);
  CHECK_THROWS_AS(SynthMachineBc(Waveform({}, 8000), "laptop", 4), Error);
}

TEST_CASE("machine BC differs from human BC in the 1-2 kHz band") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const VocalModel m = RandomVocalModel("s", seed);
    const Waveform clear = SynthUtterance(m, 4.0, seed);
    const double human = BandFraction(
        AveragedPowerSpectrum(ApplyBcChannel(clear, m.bc_channel).samples()), 8000,
        1000.0, 2000.0);
    for (const std::string& dev : DeviceProfileNames()) {
      const double machine = BandFraction(
          AveragedPowerSpectrum(SynthMachineBc(clear, dev, seed).samples()), 8000,
          1000.0, 2000.0);
      CAPTURE(dev);
      CHECK(std::abs(10.0 * std::log10(machine / human)) >= 6.0);
    }
  }
}

TEST_CASE("device profiles have distinct resonance signatures") {
  const Waveform white = testing::WhiteNoise(32000, 0.2, 8000, 77);
  std::vector<std::set<int>> peaks;
  for (const std::string& dev : DeviceProfileNames()) {
    const auto psd = AveragedPowerSpectrum(SynthMachineBc(white, dev, 1).samples());
    std::vector<std::pair<double, int>> local;
    for (std::size_t k = 2; k + 2 < psd.size(); ++k) {
      if (psd[k] > psd[k - 1] && psd[k] >= psd[k + 1] && psd[k] > psd[k - 2] &&
          psd[k] >= psd[k + 2]) {
        local.emplace_back(psd[k], static_cast<int>(k));
      }
    }
    std::sort(local.rbegin(), local.rend());
    REQUIRE(local.size() >= 3);
    std::set<int> top;
    for (int i = 0; i < 3; ++i) top.insert(local[i].second);
    peaks.push_back(top);
    for (int k : top) CHECK(k * 8000.0 / 256 >= 500.0);
  }
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    for (std::size_t j = i + 1; j < peaks.size(); ++j) CHECK(peaks[i] != peaks[j]);
  }
}

TEST_CASE("scene spec JSON round trip and enum names") {
  SceneSpec s;
  s.ac_snr_db = -5.0;
  s.background_speakers = 2;
  s.delay_samples = -37;
  s.attack = AttackClass::kCrossdomainMachine;
  s.condition = Condition::kNodding;
  s.device_profile = "laptop";
  const nlohmann::json j = s;
  CHECK(j.get<SceneSpec>() == s);
  CHECK(j["bc_snr_db"].is_null());
  CHECK_THROWS_AS(ParseAttackClass("teleport"), Error);
  CHECK(ParseCondition("moving") == Condition::kMoving);
  CHECK(IsGenuine(GroundTruthFor(AttackClass::kNone)));
  CHECK_FALSE(IsGenuine(GroundTruthFor(AttackClass::kFalseTrigger)));
}

TEST_CASE("corpus plans are deterministic with distinct speakers") {
  SceneMix mix = GenuineOnlyMix(4.0);
  SceneTemplate ft;
  ft.scene.attack = AttackClass::kFalseTrigger;
  ft.delay_min = -50;
  ft.delay_max = 50;
  mix.push_back(ft);
  const Corpus a = PlanCorpus(8, 30, mix, 7);
  const Corpus b = PlanCorpus(8, 30, mix, 7);
  CHECK(ManifestJson(a).dump() == ManifestJson(b).dump());
  CHECK(ManifestJson(a).dump() != ManifestJson(PlanCorpus(8, 30, mix, 8)).dump());
  CHECK(a.entries.size() == 240);

  std::set<std::string> channels;
  for (const VocalModel& m : a.speakers) channels.insert(nlohmann::json(m.bc_channel).dump());
  CHECK(channels.size() == 8);

  for (const CorpusEntry& e : a.entries) {
    CHECK(e.ground_truth == GroundTruthFor(e.scene.attack));
    if (e.scene.attack != AttackClass::kNone) CHECK(e.ground_truth != "genuine");
  }
  const Corpus g = PlanCorpus(3, 5, GenuineOnlyMix(), 1);
  for (const CorpusEntry& e : g.entries) CHECK(e.ground_truth == "genuine");
  CHECK_THROWS_AS(PlanCorpus(1, 5, mix, 1), Error);
}

TEST_CASE("corpus build writes identical files for identical seeds") {
  const fs::path root = fs::temp_directory_path() / "bcauth_synth_test";
  fs::remove_all(root);
  SceneMix mix = ParseSceneMix(nlohmann::json::parse(R"([
    {"weight": 1, "duration_s": 2, "delay_min": -20, "delay_max": 20},
    {"weight": 1, "duration_s": 2,
     "scene": {"attack": "crossdomain_machine", "bc_snr_db": 10}}])"));
  const Corpus a = BuildCorpus(root / "a", 2, 3, mix, 5);
  const Corpus b = BuildCorpus(root / "b", 2, 3, mix, 5);
  CHECK(Slurp(root / "a" / "manifest.json") == Slurp(root / "b" / "manifest.json"));
  for (const CorpusEntry& e : a.entries) {
    CHECK(Slurp(root / "a" / e.bc_path) == Slurp(root / "b" / e.bc_path));
  }
  const Corpus loaded = LoadCorpus(root / "a");
  REQUIRE(loaded.entries.size() == a.entries.size());
  CHECK(ManifestJson(loaded).dump() == ManifestJson(a).dump());
  const AirBonePair p = LoadPair(loaded, loaded.entries[1]);
  const RenderedPair r = RenderEntry(a, a.entries[1]);
  REQUIRE(p.ac.size() == r.pair.ac.size());
  for (std::size_t i = 0; i < p.ac.size(); ++i) {
    CHECK(p.ac[i] == static_cast<double>(static_cast<float>(r.pair.ac[i])));
  }
  const nlohmann::json m = nlohmann::json::parse(Slurp(root / "a" / "manifest.json"));
  for (const auto& e : m) {
    for (const char* key : {"pair_id", "speaker_id", "ac_path", "bc_path", "scene",
                            "ground_truth", "delay_samples"}) {
      CHECK(e.contains(key));
    }
  }
  CHECK_THROWS_AS(LoadCorpus(root / "missing"), Error);
  fs::remove_all(root);
}

}  // namespace
}  // namespace bcauth::synth
