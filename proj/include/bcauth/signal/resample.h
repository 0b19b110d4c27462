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

#ifndef BCAUTH_SIGNAL_RESAMPLE_H_
#define BCAUTH_SIGNAL_RESAMPLE_H_

#include "bcauth/signal/waveform.h"

namespace bcauth::signal {

// Rational-ratio downsampling through a polyphase anti-aliasing FIR. The
// filter passes up to 0.8x the target Nyquist and has its stopband from the
// target Nyquist on (>= 50 dB). Output length is ceil(n * target / source).
Waveform Resample(const Waveform& w, int target_rate);

}  // namespace bcauth::signal

#endif  // BCAUTH_SIGNAL_RESAMPLE_H_
