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

#ifndef BCAUTH_SYNTH_VOCAL_H_
#define BCAUTH_SYNTH_VOCAL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bcauth/signal/waveform.h"
#include "json.hpp"

namespace bcauth::synth {

inline constexpr int kPipelineRate = 8000;

// Band layout of BcChannel::attenuation_profile: kBcBands equal bands over
// [0, kBcBandTop] Hz, one gain per band, interpolated between band centres.
inline constexpr int kBcBands = 8;
inline constexpr double kBcBandTop = 2000.0;

struct Formant {
  double center_hz = 500.0;
  double bandwidth_hz = 80.0;
};

// Skull/tissue path from the clear signal to the accelerometer:
// g(x) = attenuation(lowpass(x + c * x^2)), with the static (mean) part of
// the quadratic term dropped since the sensor does not register it.
struct BcChannel {
  double lowpass_cutoff = 1500.0;
  std::vector<double> attenuation_profile = std::vector<double>(kBcBands, 1.0);
  double nonlinearity_coeff = 0.1;

  void Validate() const;
  bool operator==(const BcChannel&) const = default;
};

struct VocalModel {
  std::string speaker_id;
  double pitch_f0 = 120.0;
  std::vector<Formant> formants;
  BcChannel bc_channel;

  void Validate() const;
};

// Draws a speaker from the documented ranges:
//   f0 90-240 Hz; F1 350-750, F2 1000-2000, F3 2300-3000, F4 3300-3800 Hz;
//   BC cutoff 1000-1900 Hz; band gains exp(-s f / 1 kHz) * U(0.45, 1) with
//   s in [0.5, 1.3]; nonlinearity 0.05-0.4.
VocalModel RandomVocalModel(const std::string& speaker_id, std::uint64_t seed);

// Glottal pulse train shaped by per-syllable vowel formants. Voiced syllables
// alternate with silent or fricative gaps; at least 10% of the output is
// unvoiced. Deterministic in (model, duration, seed, rate).
signal::Waveform SynthUtterance(const VocalModel& model, double duration_s,
                                std::uint64_t seed,
                                int sample_rate = kPipelineRate);

// g(x) for the given channel. Output has the input's length and rate.
signal::Waveform ApplyBcChannel(const signal::Waveform& clear,
                                const BcChannel& channel);

// Stable 64-bit mixing of a seed with a stream tag.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t tag);

void to_json(nlohmann::json& j, const Formant& f);
void from_json(const nlohmann::json& j, Formant& f);
void to_json(nlohmann::json& j, const BcChannel& c);
void from_json(const nlohmann::json& j, BcChannel& c);
void to_json(nlohmann::json& j, const VocalModel& m);
void from_json(const nlohmann::json& j, VocalModel& m);

}  // namespace bcauth::synth

#endif  // BCAUTH_SYNTH_VOCAL_H_
