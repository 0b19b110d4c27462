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

#include "bcauth/synth/machine.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bcauth/error.h"
#include "bcauth/signal/filters.h"

namespace bcauth::synth {
namespace {

const std::vector<DeviceProfile>& Profiles() {
  static const std::vector<DeviceProfile> kProfiles = {
      {"laptop", 250.0, 0.35, 0.25,
       {{820.0, 8.0, 1.0}, {1650.0, 10.0, 1.4}, {2900.0, 12.0, 0.8}}},
      {"phone", 400.0, 0.45, 0.30,
       {{1150.0, 9.0, 1.2}, {1900.0, 10.0, 1.0}, {3300.0, 12.0, 0.9}}},
      {"conference", 150.0, 0.25, 0.15,
       {{600.0, 7.0, 0.7}, {1350.0, 9.0, 2.0}, {2500.0, 11.0, 1.0}}},
  };
  return kProfiles;
}

// Biquad band-pass (constant peak gain) resonance, applied causally.
std::vector<double> Resonate(std::span<const double> x, double centre, double q,
                             int rate) {
  const double w0 = 2.0 * std::numbers::pi * centre / rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0, b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
  std::vector<double> y(x.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = b0 * x[i] + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x[i];
    y2 = y1;
    y1 = v;
    y[i] = v;
  }
  return y;
}

}  // namespace

const std::vector<std::string>& DeviceProfileNames() {
  static const std::vector<std::string> kNames = {"laptop", "phone", "conference"};
  return kNames;
}

const DeviceProfile& GetDeviceProfile(const std::string& name) {
  for (const DeviceProfile& p : Profiles()) {
    if (p.name == name) return p;
  }
  throw Error(ErrorKind::kNotFound, "unknown device profile: " + name);
}

signal::Waveform SynthMachineBc(const signal::Waveform& source_ac,
                                const std::string& device_profile,
                                std::uint64_t seed) {
  const DeviceProfile& dev = GetDeviceProfile(device_profile);
  Require(!source_ac.empty(), "machine bc: empty source");
  const int rate = source_ac.sample_rate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);

  const signal::Waveform driven = signal::ApplyFilter(
      source_ac.Normalized(), signal::FilterSpec::Highpass(dev.driver_highpass_hz));
  std::vector<double> s(driven.samples().begin(), driven.samples().end());
  for (double& v : s) {
    v = v + dev.quadratic_distortion * v * v + dev.cubic_distortion * v * v * v;
  }
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  for (double& v : s) v -= mean;

  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = 0.15 * s[i];
  for (const Resonance& r : dev.resonances) {
    const double centre = std::min(r.center_hz * (1.0 + jitter(rng)), 0.45 * rate);
    const std::vector<double> y = Resonate(s, centre, r.q, rate);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += r.gain * y[i];
  }
  std::normal_distribution<double> g(0.0, 1.0);
  const double floor = 1e-3 * signal::Rms(out);
  for (double& v : out) v += floor * g(rng);
  return signal::Waveform(std::move(out), rate);
}

}  // namespace bcauth::synth
