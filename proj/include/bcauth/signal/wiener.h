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

#ifndef BCAUTH_SIGNAL_WIENER_H_
#define BCAUTH_SIGNAL_WIENER_H_

#include <cstddef>

#include "bcauth/signal/waveform.h"

namespace bcauth::signal {

struct WienerOptions {
  std::size_t frame_length = 256;  // even; hop is half a frame
  double smoothing = 0.98;         // decision-directed a-priori SNR weight
  double gain_floor = 0.0;
};

// STFT-domain Wiener filter with a decision-directed a-priori SNR estimate.
// The noise spectrum is the mean periodogram of noise_profile. Analysis and
// synthesis use square-root Hann windows at 50% overlap, so unit gain
// reconstructs the input.
Waveform WienerDenoise(const Waveform& w, const Waveform& noise_profile,
                       const WienerOptions& options = {});

// Concatenates the frames whose energy falls in the lowest `fraction` of the
// signal's frame energies; used as a noise estimate from unvoiced segments.
Waveform EstimateNoiseProfile(const Waveform& w, double fraction = 0.1,
                              std::size_t frame_length = 256);

}  // namespace bcauth::signal

#endif  // BCAUTH_SIGNAL_WIENER_H_
