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

#include "bcauth/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bcauth/error.h"

namespace bcauth::eval {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rates at each threshold of an increasing list, from sorted class scores.
std::vector<RocPoint> Sweep(const ScoreSet& s, const std::vector<double>& thresholds) {
  std::vector<double> g = s.genuine, im = s.impostor;
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto below_g = std::lower_bound(g.begin(), g.end(), t) - g.begin();
    const auto below_i = std::lower_bound(im.begin(), im.end(), t) - im.begin();
    out.push_back({t, static_cast<double>(im.size() - below_i) / im.size(),
                   static_cast<double>(below_g) / g.size()});
  }
  return out;
}

std::vector<double> DistinctScores(const ScoreSet& s) {
  std::vector<double> all = s.genuine;
  all.insert(all.end(), s.impostor.begin(), s.impostor.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

struct Crossing {
  double eer;
  double threshold;
};

Crossing FindCrossing(const std::vector<RocPoint>& c) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = c[i].frr - c[i].far;
    if (d < 0.0) continue;
    if (d == 0.0 || i == 0) return {c[i].far, c[i].threshold};
    const double d0 = c[i - 1].frr - c[i - 1].far;
    const double a = -d0 / (d - d0);
    const double eer = c[i - 1].far + a * (c[i].far - c[i - 1].far);
    return {eer, c[i - 1].threshold + a * (c[i].threshold - c[i - 1].threshold)};
  }
  // Unreachable for complete sweeps: the last point has FRR 1 and FAR 0.
  return {c.back().far, c.back().threshold};
}

}  // namespace

void ScoreSet::Validate() const {
  if (genuine.empty() || impostor.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "score set '" + label + "' needs both genuine and impostor scores");
  }
  for (const auto* v : {&genuine, &impostor}) {
    for (double x : *v) Require(std::isfinite(x), "score set contains a non-finite score");
  }
}

double FalseAcceptRate(const ScoreSet& s, double threshold) {
  s.Validate();
  const auto n = std::count_if(s.impostor.begin(), s.impostor.end(),
                               [&](double x) { return x >= threshold; });
  return static_cast<double>(n) / s.impostor.size();
}

double FalseRejectRate(const ScoreSet& s, double threshold) {
  s.Validate();
  const auto n = std::count_if(s.genuine.begin(), s.genuine.end(),
                               [&](double x) { return x < threshold; });
  return static_cast<double>(n) / s.genuine.size();
}

EerResult ComputeEer(const ScoreSet& s) {
  s.Validate();
  std::vector<double> t = DistinctScores(s);
  // Just above the top score everything is rejected.
  t.push_back(std::nextafter(t.back(), kInf));
  const Crossing c = FindCrossing(Sweep(s, t));
  return {c.eer, c.threshold};
}

std::vector<RocPoint> RocCurve(const ScoreSet& s, std::size_t n_points) {
  s.Validate();
  std::vector<double> t;
  const std::vector<double> distinct = DistinctScores(s);
  if (n_points == 0) {
    t = distinct;
  } else {
    const double lo = distinct.front(), hi = distinct.back();
    for (std::size_t i = 0; i < n_points; ++i) {
      t.push_back(n_points == 1 ? lo : lo + (hi - lo) * i / (n_points - 1));
    }
  }
  t.insert(t.begin(), -kInf);
  t.push_back(kInf);
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return Sweep(s, t);
}

double EerFromCurve(const std::vector<RocPoint>& curve) {
  Require(!curve.empty(), "empty ROC curve");
  return FindCrossing(curve).eer;
}

Histogram MakeHistogram(const std::vector<double>& scores, std::size_t bins,
                        double lo, double hi) {
  Require(bins > 0 && hi > lo, "histogram needs bins > 0 and hi > lo");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  for (double x : scores) {
    const double u = (x - lo) / (hi - lo) * bins;
    const auto k = static_cast<long long>(std::floor(u));
    ++h.counts[static_cast<std::size_t>(std::clamp<long long>(k, 0, bins - 1))];
  }
  return h;
}

}  // namespace bcauth::eval
