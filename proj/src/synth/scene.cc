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

#include "bcauth/synth/scene.h"

#include <cmath>
#include <random>

#include "bcauth/error.h"
#include "bcauth/signal/filters.h"
#include "bcauth/synth/machine.h"

namespace bcauth::synth {
namespace {

using signal::Waveform;

// Sensor floor, re the speech-driven BC power.
constexpr double kSensorFloorDb = -45.0;
// Motion level for attack scenes that leave the BC channel silent and do not
// specify a BC SNR.
constexpr double kDefaultSilentMotionSnrDb = 10.0;

enum Tag : std::uint64_t {
  kTagMotion = 1,
  kTagFloor,
  kTagAcNoise,
  kTagRoom,
  kTagMachine,
  kTagBackground = 100,
};

double MeanPower(std::span<const double> x) {
  return x.empty() ? 0.0 : signal::Energy(x) / static_cast<double>(x.size());
}

std::vector<double> Gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  return x;
}

std::vector<double> Fit(std::span<const double> x, std::size_t n) {
  std::vector<double> out(n, 0.0);
  std::copy_n(x.begin(), std::min(n, x.size()), out.begin());
  return out;
}

void AddScaled(std::vector<double>& acc, std::span<const double> x, double gain) {
  for (std::size_t i = 0; i < acc.size() && i < x.size(); ++i) acc[i] += gain * x[i];
}

// Damped sinusoid bursts at roughly periodic onsets.
void AddBursts(std::vector<double>& x, double rate_hz, double f_lo, double f_hi,
               double decay_s, double amp, int sample_rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double period = sample_rate / rate_hz;
  double t = u(rng) * period;
  while (t < static_cast<double>(x.size())) {
    const double f = f_lo + (f_hi - f_lo) * u(rng);
    const double a = amp * (0.6 + 0.8 * u(rng));
    const auto start = static_cast<std::size_t>(t);
    const auto len = static_cast<std::size_t>(5.0 * decay_s * sample_rate);
    for (std::size_t i = 0; i < len && start + i < x.size(); ++i) {
      const double s = static_cast<double>(i) / sample_rate;
      x[start + i] += a * std::exp(-s / decay_s) *
                      std::sin(2.0 * std::numbers::pi * f * s);
    }
    t += period * (0.8 + 0.4 * u(rng));
  }
}

Waveform RoomResponse(const Waveform& x, std::uint64_t seed) {
  const int rate = x.sample_rate();
  const auto tail = static_cast<std::size_t>(0.2 * rate);
  const std::vector<double> g = Gaussian(tail, seed);
  // Causal impulse response embedded in an odd-length centred kernel.
  std::vector<double> h(2 * tail + 1, 0.0);
  h[tail] = 1.0;
  for (std::size_t k = 1; k <= tail; ++k) {
    h[tail + k] = 0.3 * g[k - 1] * std::exp(-6.9 * k / static_cast<double>(tail));
  }
  const Waveform played = signal::ApplyFilter(
      x, signal::FilterSpec::Bandpass(200.0, std::min(3500.0, 0.45 * rate)));
  return Waveform(signal::ConvolveSame(played.samples(), h), rate);
}

}  // namespace

const char* AttackClassName(AttackClass a) {
  switch (a) {
    case AttackClass::kNone: return "none";
    case AttackClass::kFalseTrigger: return "false_trigger";
    case AttackClass::kAcousticImpersonation: return "acoustic_impersonation";
    case AttackClass::kAcousticReplay: return "acoustic_replay";
    case AttackClass::kCrossdomainImpersonation: return "crossdomain_impersonation";
    case AttackClass::kCrossdomainMachine: return "crossdomain_machine";
  }
  return "unknown";
}

AttackClass ParseAttackClass(const std::string& name) {
  for (AttackClass a :
       {AttackClass::kNone, AttackClass::kFalseTrigger,
        AttackClass::kAcousticImpersonation, AttackClass::kAcousticReplay,
        AttackClass::kCrossdomainImpersonation, AttackClass::kCrossdomainMachine}) {
    if (name == AttackClassName(a)) return a;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown attack class: " + name);
}

const char* ConditionName(Condition c) {
  switch (c) {
    case Condition::kStill: return "still";
    case Condition::kTurning: return "turning";
    case Condition::kNodding: return "nodding";
    case Condition::kMoving: return "moving";
  }
  return "unknown";
}

Condition ParseCondition(const std::string& name) {
  for (Condition c : {Condition::kStill, Condition::kTurning,
                      Condition::kNodding, Condition::kMoving}) {
    if (name == ConditionName(c)) return c;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown condition: " + name);
}

std::string GroundTruthFor(AttackClass a) {
  switch (a) {
    case AttackClass::kNone: return "genuine";
    case AttackClass::kFalseTrigger: return "false_trigger";
    default: return std::string("attack:") + AttackClassName(a);
  }
}

bool IsGenuine(const std::string& ground_truth) {
  return ground_truth == "genuine";
}

void to_json(nlohmann::json& j, const SceneSpec& s) {
  j = nlohmann::json::object();
  j["ac_snr_db"] = s.ac_snr_db ? nlohmann::json(*s.ac_snr_db) : nullptr;
  j["bc_snr_db"] = s.bc_snr_db ? nlohmann::json(*s.bc_snr_db) : nullptr;
  j["background_speakers"] = s.background_speakers;
  j["background_level_db"] = s.background_level_db;
  j["delay_samples"] = s.delay_samples;
  j["attack"] = AttackClassName(s.attack);
  j["condition"] = ConditionName(s.condition);
  if (!s.device_profile.empty()) j["device_profile"] = s.device_profile;
}

void from_json(const nlohmann::json& j, SceneSpec& s) {
  s = SceneSpec{};
  if (j.contains("ac_snr_db") && !j["ac_snr_db"].is_null()) {
    s.ac_snr_db = j["ac_snr_db"].get<double>();
  }
  if (j.contains("bc_snr_db") && !j["bc_snr_db"].is_null()) {
    s.bc_snr_db = j["bc_snr_db"].get<double>();
  }
  s.background_speakers = j.value("background_speakers", 0);
  s.background_level_db = j.value("background_level_db", -10.0);
  s.delay_samples = j.value("delay_samples", 0);
  s.attack = ParseAttackClass(j.value("attack", std::string("none")));
  s.condition = ParseCondition(j.value("condition", std::string("still")));
  s.device_profile = j.value("device_profile", std::string());
}

Waveform MotionNoise(Condition condition, std::size_t length, int sample_rate,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(length, 0.0);
  // Leaky random walk.
  double walk = 0.0;
  for (double& v : x) {
    walk = 0.9 * walk + g(rng);
    v = walk;
  }
  const double walk_rms = signal::Rms(x);
  if (walk_rms > 0.0) {
    for (double& v : x) v /= walk_rms;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (condition) {
    case Condition::kStill:
      break;
    case Condition::kTurning: {
      // Slow turns: episodes of 0.5-1.5 s with raised motion level.
      std::size_t pos = 0;
      while (pos < length) {
        const auto gap = static_cast<std::size_t>((0.3 + 0.7 * u(rng)) * sample_rate);
        const auto dur = static_cast<std::size_t>((0.5 + 1.0 * u(rng)) * sample_rate);
        pos += gap;
        for (std::size_t i = 0; i < dur && pos + i < length; ++i) {
          x[pos + i] *= 1.0 + 3.0 * std::sin(std::numbers::pi * i / dur);
        }
        pos += dur;
      }
      break;
    }
    case Condition::kNodding:
      AddBursts(x, 1.5 + u(rng), 30.0, 80.0, 0.06, 4.0, sample_rate, rng);
      break;
    case Condition::kMoving:
      AddBursts(x, 1.6 + 0.6 * u(rng), 60.0, 140.0, 0.03, 8.0, sample_rate, rng);
      break;
  }
  const std::vector<double> lp =
      signal::DesignFir(signal::FilterSpec::Lowpass(120.0), sample_rate);
  std::vector<double> y = signal::ConvolveSame(x, lp);
  const double rms = signal::Rms(y);
  if (rms > 0.0) {
    for (double& v : y) v /= rms;
  }
  return Waveform(std::move(y), sample_rate);
}

Waveform Advance(const Waveform& x, int delay) {
  const long long n = static_cast<long long>(x.size());
  std::vector<double> out(x.size(), 0.0);
  for (long long i = 0; i < n; ++i) {
    const long long j = i + delay;
    if (j >= 0 && j < n) out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(j)];
  }
  return Waveform(std::move(out), x.sample_rate());
}

RenderedPair RenderPair(const Waveform& clear, const VocalModel& model,
                        const SceneSpec& scene, std::uint64_t seed,
                        const AttackSources& sources) {
  model.Validate();
  Require(!clear.empty(), "render: empty clear signal");
  Require(clear.sample_rate() == kPipelineRate,
          "render: clear signal must be at the pipeline rate");
  const std::size_t n = clear.size();
  const int rate = clear.sample_rate();
  Require(2 * static_cast<std::size_t>(std::abs(scene.delay_samples)) < n,
          "render: |delay| must be below half the utterance length");
  Require(scene.background_speakers >= 0, "render: negative background count");

  const AttackClass attack = scene.attack;
  const auto need = [&](bool ok, const char* what) {
    Require(ok, std::string("render: ") + AttackClassName(attack) + " needs " + what);
  };

  // Speech reaching the microphone.
  std::vector<double> speech;
  switch (attack) {
    case AttackClass::kAcousticImpersonation:
    case AttackClass::kCrossdomainImpersonation:
      need(sources.attacker_clear.has_value(), "an attacker utterance");
      speech = Fit(sources.attacker_clear->samples(), n);
      break;
    case AttackClass::kAcousticReplay:
      need(sources.replay_source.has_value(), "a replay source utterance");
      speech = Fit(RoomResponse(*sources.replay_source,
                                DeriveSeed(seed, kTagRoom)).samples(), n);
      break;
    default:
      speech.assign(clear.samples().begin(), clear.samples().end());
  }

  // Noise-free vibration at the accelerometer.
  const Waveform own_bc = ApplyBcChannel(clear, model.bc_channel);
  std::vector<double> bc_clean(n, 0.0);
  bool bc_silent = false;
  switch (attack) {
    case AttackClass::kNone:
      bc_clean.assign(own_bc.samples().begin(), own_bc.samples().end());
      break;
    case AttackClass::kCrossdomainImpersonation: {
      need(sources.attacker_model.has_value(), "an attacker vocal model");
      const Waveform attacker(speech, rate);
      const Waveform v = ApplyBcChannel(attacker, sources.attacker_model->bc_channel);
      bc_clean.assign(v.samples().begin(), v.samples().end());
      break;
    }
    case AttackClass::kCrossdomainMachine: {
      need(!scene.device_profile.empty(), "a device profile");
      const Waveform v = SynthMachineBc(clear, scene.device_profile,
                                        DeriveSeed(seed, kTagMachine));
      bc_clean = Fit(v.samples(), n);
      break;
    }
    default:
      bc_silent = true;
  }

  const double ref_power =
      bc_silent ? MeanPower(own_bc.samples()) : MeanPower(bc_clean);
  std::vector<double> bc = bc_clean;
  std::optional<double> motion_snr = scene.bc_snr_db;
  if (bc_silent && !motion_snr) motion_snr = kDefaultSilentMotionSnrDb;
  if (motion_snr) {
    const Waveform motion =
        MotionNoise(scene.condition, n, rate, DeriveSeed(seed, kTagMotion));
    AddScaled(bc, motion.samples(),
              std::sqrt(ref_power * std::pow(10.0, -*motion_snr / 10.0)));
  }
  const std::vector<double> floor = Gaussian(n, DeriveSeed(seed, kTagFloor));
  AddScaled(bc, floor, std::sqrt(ref_power * std::pow(10.0, kSensorFloorDb / 10.0)));

  std::vector<double> ac = speech;
  const double speech_power = MeanPower(speech);
  for (int b = 0; b < scene.background_speakers; ++b) {
    const std::uint64_t s = DeriveSeed(seed, kTagBackground + b);
    const VocalModel other = RandomVocalModel("background", s);
    const Waveform talk = SynthUtterance(other, clear.duration_seconds(),
                                         DeriveSeed(s, 1), rate);
    const double p = MeanPower(talk.samples());
    if (p > 0.0) {
      AddScaled(ac, talk.samples(),
                std::sqrt(speech_power / p *
                          std::pow(10.0, scene.background_level_db / 10.0)));
    }
  }
  if (scene.ac_snr_db) {
    const std::vector<double> w = Gaussian(n, DeriveSeed(seed, kTagAcNoise));
    const double wp = MeanPower(w);
    AddScaled(ac, w, std::sqrt(speech_power / wp *
                               std::pow(10.0, -*scene.ac_snr_db / 10.0)));
  }

  RenderedPair out;
  out.pair.ac = Waveform(std::move(ac), rate);
  out.pair.bc = Advance(Waveform(std::move(bc), rate), scene.delay_samples);
  out.pair.speaker_id = model.speaker_id;
  out.pair.scene = scene;
  out.pair.ground_truth = GroundTruthFor(attack);
  out.ac_clean = Waveform(std::move(speech), rate);
  out.bc_clean = Advance(Waveform(std::move(bc_clean), rate), scene.delay_samples);
  return out;
}

}  // namespace bcauth::synth
