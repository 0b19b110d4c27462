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

#ifndef BCAUTH_SYNTH_SCENE_H_
#define BCAUTH_SYNTH_SCENE_H_

#include <cstdint>
#include <optional>
#include <string>

#include "bcauth/signal/waveform.h"
#include "bcauth/synth/vocal.h"
#include "json.hpp"

namespace bcauth::synth {

enum class AttackClass {
  kNone,
  kFalseTrigger,
  kAcousticImpersonation,
  kAcousticReplay,
  kCrossdomainImpersonation,
  kCrossdomainMachine,
};

// Wearer activity while the BC signal is captured; selects the body-motion
// noise model.
enum class Condition { kStill, kTurning, kNodding, kMoving };
inline constexpr int kNumConditions = 4;

const char* AttackClassName(AttackClass a);
AttackClass ParseAttackClass(const std::string& name);
const char* ConditionName(Condition c);
Condition ParseCondition(const std::string& name);

// "genuine", "false_trigger" or "attack:<class>".
std::string GroundTruthFor(AttackClass a);
bool IsGenuine(const std::string& ground_truth);

struct SceneSpec {
  std::optional<double> ac_snr_db;  // white noise; none = noiseless
  std::optional<double> bc_snr_db;  // body-motion noise; none = sensor floor only
  int background_speakers = 0;
  double background_level_db = -10.0;  // per background speaker, re clear
  // Samples by which the AC stream lags the BC stream (positive: BC leads).
  int delay_samples = 0;
  AttackClass attack = AttackClass::kNone;
  Condition condition = Condition::kStill;
  std::string device_profile;  // crossdomain_machine only

  bool operator==(const SceneSpec&) const = default;
};

void to_json(nlohmann::json& j, const SceneSpec& s);
void from_json(const nlohmann::json& j, SceneSpec& s);

struct AirBonePair {
  signal::Waveform ac;
  signal::Waveform bc;
  std::string speaker_id;
  SceneSpec scene;
  std::string ground_truth;
};

// A rendered pair together with its noise-free components, which tests and
// experiments use as ground truth.
struct RenderedPair {
  AirBonePair pair;
  signal::Waveform ac_clean;  // speech reaching the microphone, pre-noise
  signal::Waveform bc_clean;  // g(x) (or machine vibration), pre-noise
};

// Extra material some attack classes need.
struct AttackSources {
  std::optional<signal::Waveform> attacker_clear;
  std::optional<VocalModel> attacker_model;
  std::optional<signal::Waveform> replay_source;  // another take of the user
};

// Speech-independent accelerometer noise for a wearer condition: low-passed
// (< 150 Hz) random walks plus impulsive bursts, unit RMS.
signal::Waveform MotionNoise(Condition condition, std::size_t length,
                             int sample_rate, std::uint64_t seed);

// Builds the coupled AC/BC recording of a scene:
//   ac = clear + background speakers + white noise at ac_snr_db
//   bc = g(clear) + motion noise at bc_snr_db + sensor floor
// then advances bc by delay_samples. Attack classes substitute the sources
// (see AttackClass); missing AttackSources are an error.
RenderedPair RenderPair(const signal::Waveform& clear, const VocalModel& model,
                        const SceneSpec& scene, std::uint64_t seed,
                        const AttackSources& sources = {});

// Shifts x so that out[n] = x[n + delay] (zero outside).
signal::Waveform Advance(const signal::Waveform& x, int delay);

}  // namespace bcauth::synth

#endif  // BCAUTH_SYNTH_SCENE_H_
