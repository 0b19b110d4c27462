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

#ifndef BCAUTH_SYNTH_MACHINE_H_
#define BCAUTH_SYNTH_MACHINE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bcauth/signal/waveform.h"

namespace bcauth::synth {

struct Resonance {
  double center_hz;
  double q;
  double gain;
};

// Loudspeaker-plus-chassis model of a playback device pressed against the
// wearable.
struct DeviceProfile {
  std::string name;
  double driver_highpass_hz;
  double quadratic_distortion;
  double cubic_distortion;
  std::vector<Resonance> resonances;  // all within 500 Hz - 3.5 kHz
};

// "laptop", "phone", "conference".
const std::vector<std::string>& DeviceProfileNames();
const DeviceProfile& GetDeviceProfile(const std::string& name);

// Vibration picked up by the accelerometer when a device plays source_ac:
// driver high-pass, polynomial distortion (adds harmonics), then a comb of
// chassis resonances; seed jitters resonance centres by up to 2% and draws
// the sensor floor.
signal::Waveform SynthMachineBc(const signal::Waveform& source_ac,
                                const std::string& device_profile,
                                std::uint64_t seed);

}  // namespace bcauth::synth

#endif  // BCAUTH_SYNTH_MACHINE_H_
