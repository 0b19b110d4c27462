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

#ifndef BCAUTH_INIT_INITIALIZE_H_
#define BCAUTH_INIT_INITIALIZE_H_

#include <utility>
#include <vector>

#include "bcauth/signal/audio_io.h"
#include "bcauth/signal/waveform.h"
#include "json.hpp"

namespace bcauth::init {

// Frame-level delay search. Frames are non-overlapping and consecutive from
// the start of the recording.
struct SyncConfig {
  int num_frames = 8;        // K
  int frame_length = 2048;   // L, samples
  int search_window = 800;   // max |tau|, samples

  void Validate() const;
};

struct InitConfig {
  int target_rate = 8000;
  double highpass_cutoff = 20.0;
  double bc_band_max = 2000.0;
  SyncConfig sync;

  void Validate() const;
};

void to_json(nlohmann::json& j, const SyncConfig& c);
void from_json(const nlohmann::json& j, SyncConfig& c);
void to_json(nlohmann::json& j, const InitConfig& c);
void from_json(const nlohmann::json& j, InitConfig& c);

// Score used for monoaxial selection: in-band energy over out-of-band energy.
std::vector<double> AxisQuality(const signal::AccelRecord& raw,
                                const InitConfig& cfg);

struct BcResult {
  signal::Waveform bc;
  int axis = 0;
};

// Best axis, peak-normalized, resampled to the target rate (which must not
// exceed the recording rate), band-passed and Wiener-denoised.
BcResult PreprocessBcDetailed(const signal::AccelRecord& raw,
                              const InitConfig& cfg);
signal::Waveform PreprocessBc(const signal::AccelRecord& raw,
                              const InitConfig& cfg);

struct DelayEstimate {
  int delay = 0;                 // samples by which AC lags BC
  std::vector<int> frame_lags;   // argmax per used frame
  std::vector<int> used_frames;  // indices among the first K
};

// Mean of per-frame argmax_tau sum_t a(t) b(t - tau), rounded. Frames whose
// energy in either domain is below 1% of that signal's mean frame energy are
// skipped; kDegenerate when none remain.
DelayEstimate EstimateDelayDetailed(const signal::Waveform& ac,
                                    const signal::Waveform& bc,
                                    const SyncConfig& sync);
int EstimateDelay(const signal::Waveform& ac, const signal::Waveform& bc,
                  const SyncConfig& sync);

// Positive delay pads BC, negative pads AC; outputs share the shorter length.
std::pair<signal::Waveform, signal::Waveform> Align(const signal::Waveform& ac,
                                                    const signal::Waveform& bc,
                                                    int delay);

struct InitResult {
  signal::Waveform ac;
  signal::Waveform bc;
  int estimated_delay_samples = 0;
  int axis_selected = 0;
};

InitResult Initialize(const signal::Waveform& ac_raw,
                      const signal::AccelRecord& bc_raw, const InitConfig& cfg);

nlohmann::json InitRecordJson(const InitResult& r, const InitConfig& cfg);

}  // namespace bcauth::init

#endif  // BCAUTH_INIT_INITIALIZE_H_
