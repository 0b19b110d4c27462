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

#include "bcauth/signal/resample.h"

#include <algorithm>
#include <numeric>

#include "bcauth/error.h"
#include "bcauth/signal/filters.h"

namespace bcauth::signal {

Waveform Resample(const Waveform& w, int target_rate) {
  Require(target_rate > 0, "resample: target rate must be positive");
  Require(!w.empty(), "resample: empty input");
  Require(target_rate <= w.sample_rate(),
          "resample: upsampling is not supported");
  if (target_rate == w.sample_rate()) return w;

  const long long g = std::gcd(w.sample_rate(), target_rate);
  const long long up = target_rate / g;
  const long long down = w.sample_rate() / g;
  const double up_rate = static_cast<double>(w.sample_rate()) * up;
  const double width = 0.1 * target_rate;
  const double cutoff = 0.45 * target_rate;
  std::vector<double> h =
      WindowedSincLowpass(cutoff, up_rate, static_cast<int>(3.3 * up_rate / width));
  for (double& v : h) v *= static_cast<double>(up);
  const long long taps = static_cast<long long>(h.size());
  const long long mid = taps / 2;

  const std::span<const double> x = w.samples();
  const long long len = static_cast<long long>(x.size());
  const long long pad = mid / up + 2;
  std::vector<double> xp(static_cast<std::size_t>(len + 2 * pad));
  for (long long k = 1; k <= pad; ++k) {
    const long long kl = std::min(k, len - 1);
    xp[pad - k] = 2.0 * x[0] - x[kl];
    xp[pad + len - 1 + k] = 2.0 * x[len - 1] - x[len - 1 - kl];
  }
  std::copy(x.begin(), x.end(), xp.begin() + pad);

  const long long out_len = (len * up + down - 1) / down;
  std::vector<double> y(static_cast<std::size_t>(out_len));
  for (long long n = 0; n < out_len; ++n) {
    // Upsampled-domain position of this output sample, relative to xp.
    const long long pos = n * down + pad * up + mid;
    const long long j_hi = pos / up;
    const long long j_lo_num = pos - (taps - 1);
    long long j_lo = j_lo_num <= 0 ? 0 : (j_lo_num + up - 1) / up;
    double acc = 0.0;
    for (long long j = j_lo; j <= j_hi && j < static_cast<long long>(xp.size());
         ++j) {
      acc += xp[j] * h[pos - j * up];
    }
    y[n] = acc;
  }
  return Waveform(std::move(y), target_rate);
}

}  // namespace bcauth::signal
