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

#include "bcauth/init/initialize.h"

#include <cmath>
#include <complex>

#include "bcauth/error.h"
#include "bcauth/signal/fft.h"
#include "bcauth/signal/filters.h"
#include "bcauth/signal/resample.h"
#include "bcauth/signal/wiener.h"

namespace bcauth::init {
namespace {

using signal::Waveform;

// Runs f, relabelling any error with the pipeline stage.
template <typename F>
auto Staged(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.WithStage(stage);
  }
}

double FrameEnergy(std::span<const double> x, std::size_t begin, std::size_t len) {
  double e = 0.0;
  for (std::size_t i = begin; i < begin + len && i < x.size(); ++i) e += x[i] * x[i];
  return e;
}

}  // namespace

void SyncConfig::Validate() const {
  Require(num_frames >= 1, "sync: num_frames must be >= 1");
  Require(frame_length >= 16, "sync: frame_length must be >= 16");
  Require(search_window >= 0 && search_window <= frame_length / 2,
          "sync: search_window must be in [0, frame_length / 2]");
}

void InitConfig::Validate() const {
  Require(target_rate > 0, "init: target_rate must be positive");
  Require(highpass_cutoff > 0.0 && highpass_cutoff < bc_band_max &&
              bc_band_max < target_rate / 2.0,
          "init: need 0 < highpass_cutoff < bc_band_max < target_rate / 2");
  sync.Validate();
}

void to_json(nlohmann::json& j, const SyncConfig& c) {
  j = {{"num_frames", c.num_frames},
       {"frame_length", c.frame_length},
       {"search_window", c.search_window}};
}

void from_json(const nlohmann::json& j, SyncConfig& c) {
  const SyncConfig d;
  c.num_frames = j.value("num_frames", d.num_frames);
  c.frame_length = j.value("frame_length", d.frame_length);
  c.search_window = j.value("search_window", d.search_window);
}

void to_json(nlohmann::json& j, const InitConfig& c) {
  j = {{"target_rate", c.target_rate},
       {"highpass_cutoff", c.highpass_cutoff},
       {"bc_band_max", c.bc_band_max},
       {"sync", c.sync}};
}

void from_json(const nlohmann::json& j, InitConfig& c) {
  const InitConfig d;
  c.target_rate = j.value("target_rate", d.target_rate);
  c.highpass_cutoff = j.value("highpass_cutoff", d.highpass_cutoff);
  c.bc_band_max = j.value("bc_band_max", d.bc_band_max);
  c.sync = j.contains("sync") ? j["sync"].get<SyncConfig>() : d.sync;
}

std::vector<double> AxisQuality(const signal::AccelRecord& raw,
                                const InitConfig& cfg) {
  std::vector<double> q;
  for (const std::vector<double>& axis : raw.axes) {
    const std::size_t n = signal::NextPowerOfTwo(axis.size());
    std::vector<double> padded(n, 0.0);
    std::copy(axis.begin(), axis.end(), padded.begin());
    const signal::RealFft fft(n);
    std::vector<std::complex<double>> spec(fft.bins());
    fft.Forward(padded, spec);
    const double df = static_cast<double>(raw.sample_rate) / n;
    double in = 0.0, out = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double p = std::norm(spec[k]);
      const double f = k * df;
      (f >= cfg.highpass_cutoff && f <= cfg.bc_band_max ? in : out) += p;
    }
    q.push_back(in + out == 0.0 ? 0.0 : in / (out + 1e-12 * (in + out)));
  }
  return q;
}

BcResult PreprocessBcDetailed(const signal::AccelRecord& raw,
                              const InitConfig& cfg) {
  return Staged("preprocess_bc", [&] {
    cfg.Validate();
    Require(!raw.axes.empty() && raw.size() > 0, "empty accelerometer record");
    Require(raw.sample_rate >= 2.0 * cfg.bc_band_max,
            "accelerometer rate below twice the BC band limit");
    for (const auto& a : raw.axes) {
      Require(a.size() == raw.size(), "accelerometer axes differ in length");
    }
    const std::vector<double> quality = AxisQuality(raw, cfg);
    bool any = false;
    for (const auto& a : raw.axes) {
      for (double v : a) any = any || v != 0.0;
    }
    if (!any) {
      throw Error(ErrorKind::kDegenerate, "accelerometer record is all zeros");
    }
    BcResult r;
    for (std::size_t i = 1; i < quality.size(); ++i) {
      if (quality[i] > quality[r.axis]) r.axis = static_cast<int>(i);
    }
    Waveform x = Waveform(raw.axes[r.axis], raw.sample_rate).Normalized();
    x = signal::Resample(x, cfg.target_rate);
    x = signal::ApplyFilter(
        x, signal::FilterSpec::Bandpass(cfg.highpass_cutoff, cfg.bc_band_max));
    r.bc = signal::WienerDenoise(x, signal::EstimateNoiseProfile(x));
    return r;
  });
}

Waveform PreprocessBc(const signal::AccelRecord& raw, const InitConfig& cfg) {
  return PreprocessBcDetailed(raw, cfg).bc;
}

DelayEstimate EstimateDelayDetailed(const Waveform& ac, const Waveform& bc,
                                    const SyncConfig& sync) {
  return Staged("estimate_delay", [&] {
    sync.Validate();
    Require(ac.sample_rate() == bc.sample_rate(),
            "AC and BC sample rates differ");
    const std::size_t len = static_cast<std::size_t>(sync.frame_length);
    const std::size_t need = len * static_cast<std::size_t>(sync.num_frames);
    Require(ac.size() >= need && bc.size() >= need,
            "recordings shorter than num_frames * frame_length");

    const std::span<const double> a = ac.samples();
    const std::span<const double> b = bc.samples();
    const double a_mean = FrameEnergy(a, 0, a.size()) * len / a.size();
    const double b_mean = FrameEnergy(b, 0, b.size()) * len / b.size();
    const int w = sync.search_window;
    const long long nb = static_cast<long long>(b.size());

    // Prefix sums of b^2 give each candidate segment's energy.
    std::vector<double> b2(b.size() + 1, 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) b2[i + 1] = b2[i] + b[i] * b[i];

    DelayEstimate est;
    long long sum = 0;
    for (int k = 0; k < sync.num_frames; ++k) {
      const std::size_t start = k * len;
      const double ea = FrameEnergy(a, start, len);
      const double eb = FrameEnergy(b, start, len);
      if (!(ea > 0.01 * a_mean) || !(eb > 0.01 * b_mean)) continue;
      // Normalized per lag so a segment with more energy cannot win on
      // amplitude alone.
      int best = 0;
      double best_c = -INFINITY;
      for (int tau = -w; tau <= w; ++tau) {
        double c = 0.0;
        const long long off = static_cast<long long>(start) - tau;
        const long long t0 = std::max(0LL, -off);
        const long long t1 = std::min<long long>(len, nb - off);
        for (long long t = t0; t < t1; ++t) c += a[start + t] * b[off + t];
        const double seg = t1 > t0 ? b2[off + t1] - b2[off + t0] : 0.0;
        if (seg <= 0.0) continue;
        c /= std::sqrt(seg);
        if (c > best_c) {
          best_c = c;
          best = tau;
        }
      }
      est.frame_lags.push_back(best);
      est.used_frames.push_back(k);
      sum += best;
    }
    if (est.used_frames.empty()) {
      throw Error(ErrorKind::kDegenerate,
                  "every sync frame is silent in at least one domain");
    }
    est.delay = static_cast<int>(std::lround(static_cast<double>(sum) /
                                             est.used_frames.size()));
    return est;
  });
}

int EstimateDelay(const Waveform& ac, const Waveform& bc, const SyncConfig& sync) {
  return EstimateDelayDetailed(ac, bc, sync).delay;
}

std::pair<Waveform, Waveform> Align(const Waveform& ac, const Waveform& bc,
                                    int delay) {
  return Staged("align", [&] {
    Require(ac.sample_rate() == bc.sample_rate(), "AC and BC sample rates differ");
    const std::size_t shift = static_cast<std::size_t>(std::abs(delay));
    Require(shift < std::min(ac.size(), bc.size()),
            "|delay| must be below the shorter recording length");
    const auto pad = [&](const Waveform& w, std::size_t p) {
      std::vector<double> x(p, 0.0);
      x.insert(x.end(), w.samples().begin(), w.samples().end());
      return x;
    };
    std::vector<double> a = pad(ac, delay < 0 ? shift : 0);
    std::vector<double> b = pad(bc, delay > 0 ? shift : 0);
    const std::size_t n = std::min(a.size(), b.size());
    a.resize(n);
    b.resize(n);
    return std::pair{Waveform(std::move(a), ac.sample_rate()),
                     Waveform(std::move(b), bc.sample_rate())};
  });
}

InitResult Initialize(const Waveform& ac_raw, const signal::AccelRecord& bc_raw,
                      const InitConfig& cfg) {
  Staged("initialize", [&] {
    cfg.Validate();
    Require(!ac_raw.empty(), "empty AC recording");
    return 0;
  });
  const Waveform ac = Staged("preprocess_ac", [&] {
    const Waveform x = signal::Resample(ac_raw, cfg.target_rate);
    return signal::WienerDenoise(x, signal::EstimateNoiseProfile(x));
  });
  const BcResult bc = PreprocessBcDetailed(bc_raw, cfg);
  const int delay = EstimateDelay(ac, bc.bc, cfg.sync);
  auto [a, b] = Align(ac, bc.bc, delay);
  return InitResult{std::move(a), std::move(b), delay, bc.axis};
}

nlohmann::json InitRecordJson(const InitResult& r, const InitConfig& cfg) {
  return {{"estimated_delay_samples", r.estimated_delay_samples},
          {"axis_selected", r.axis_selected},
          {"config_used", cfg}};
}

}  // namespace bcauth::init
