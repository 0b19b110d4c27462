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

#ifndef BCAUTH_BCSR_DETECTOR_H_
#define BCAUTH_BCSR_DETECTOR_H_

#include <span>
#include <vector>

#include "json.hpp"

namespace bcauth::bcsr {

enum class DetectorKind { kLda, kLogistic };
const char* DetectorKindName(DetectorKind k);
DetectorKind ParseDetectorKind(const std::string& name);

// Linear human/machine classifier on embedding vectors; Score > 0 means
// machine. Inputs are standardized by (x - center) / scale before the dot
// product (LDA uses center 0, scale 1).
struct MachineDetector {
  DetectorKind kind = DetectorKind::kLda;
  std::vector<double> center;
  std::vector<double> scale;
  std::vector<double> weights;
  double bias = 0.0;

  double Score(std::span<const double> x) const;
  bool IsMachine(std::span<const double> x) const { return Score(x) > 0.0; }
};

void to_json(nlohmann::json& j, const MachineDetector& d);
void from_json(const nlohmann::json& j, MachineDetector& d);

// labels: 1 = machine, 0 = human. Both classes are required.
//
// Fisher discriminant with the within-class scatter shrunk towards
// shrinkage * mean variance * I; the threshold sits midway between the
// projected class means. Invariant to a global rescaling of the data.
MachineDetector FitLda(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& labels, double shrinkage = 0.1);

// L2-regularized logistic regression on standardized inputs, fitted by
// full-batch gradient descent.
MachineDetector FitLogistic(const std::vector<std::vector<double>>& x,
                            const std::vector<int>& labels, double l2 = 1e-2,
                            int iterations = 500, double step = 0.5);

double Accuracy(const MachineDetector& d, const std::vector<std::vector<double>>& x,
                const std::vector<int>& labels);

}  // namespace bcauth::bcsr

#endif  // BCAUTH_BCSR_DETECTOR_H_
