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

#ifndef BCAUTH_SIGNAL_AUDIO_IO_H_
#define BCAUTH_SIGNAL_AUDIO_IO_H_

#include <array>
#include <filesystem>
#include <vector>

#include "bcauth/signal/waveform.h"

namespace bcauth::signal {

enum class WavFormat { kPcm16, kFloat32 };

// Mono WAV, PCM16 or 32-bit float. Multi-channel input is rejected. PCM16
// output clips to [-1, 1).
Waveform ReadWav(const std::filesystem::path& path);
void WriteWav(const std::filesystem::path& path, const Waveform& w,
              WavFormat format = WavFormat::kPcm16);

// Raw three-axis accelerometer readings in m/s^2.
struct AccelRecord {
  std::vector<std::vector<double>> axes;  // 1 or 3 axes of equal length
  int sample_rate = 0;

  std::size_t size() const { return axes.empty() ? 0 : axes.front().size(); }
  static AccelRecord FromWaveform(const Waveform& w);
};

// CSV with header "t,x,y,z"; the sample rate is recovered from the mean
// spacing of t.
AccelRecord ReadAccelCsv(const std::filesystem::path& path);
void WriteAccelCsv(const std::filesystem::path& path, const AccelRecord& r);

// JSON sidecar {"sample_rate": R, "axes": ["x.f32", "y.f32", "z.f32"]} that
// names one little-endian float32 file per axis, relative to the sidecar.
AccelRecord ReadAccelBinary(const std::filesystem::path& sidecar);
void WriteAccelBinary(const std::filesystem::path& sidecar,
                      const AccelRecord& r);

// Dispatches on extension: .csv, .json (binary sidecar) or .wav (one axis).
AccelRecord ReadAccel(const std::filesystem::path& path);

}  // namespace bcauth::signal

#endif  // BCAUTH_SIGNAL_AUDIO_IO_H_
