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

#ifndef BCAUTH_EVAL_METRICS_H_
#define BCAUTH_EVAL_METRICS_H_

#include <string>
#include <vector>

namespace bcauth::eval {

// Higher scores mean "more genuine"; a threshold t accepts every score >= t.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
  std::string label;

  // Both classes nonempty, all scores finite.
  void Validate() const;
};

double FalseAcceptRate(const ScoreSet& s, double threshold);
double FalseRejectRate(const ScoreSet& s, double threshold);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Sweeps every distinct score (plus a point above the maximum) and linearly
// interpolates FAR and FRR between the two sweep points where FRR - FAR
// changes sign. Depends on scores only through their ranks.
EerResult ComputeEer(const ScoreSet& s);

struct RocPoint {
  double threshold;
  double far;
  double frr;
};

// Thresholds in increasing order, so FAR falls and FRR rises along the list.
// n_points == 0 uses every distinct score; otherwise n_points thresholds
// evenly spaced over the score range. Both extremes (FAR = 1, FRR = 0) and
// (FAR = 0, FRR = 1) are always included.
std::vector<RocPoint> RocCurve(const ScoreSet& s, std::size_t n_points = 0);

// EER read off a curve by the same sign-change interpolation.
double EerFromCurve(const std::vector<RocPoint>& curve);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
};

Histogram MakeHistogram(const std::vector<double>& scores, std::size_t bins,
                        double lo, double hi);

}  // namespace bcauth::eval

#endif  // BCAUTH_EVAL_METRICS_H_
