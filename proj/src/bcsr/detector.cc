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

#include "bcauth/bcsr/detector.h"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "bcauth/error.h"

namespace bcauth::bcsr {
namespace {

void CheckInput(const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
  Require(!x.empty() && x.size() == y.size(), "detector: need one label per sample");
  int machines = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Require(x[i].size() == x.front().size() && !x[i].empty(),
            "detector: embeddings differ in width");
    Require(y[i] == 0 || y[i] == 1, "detector: labels must be 0 or 1");
    machines += y[i];
  }
  Require(machines > 0 && machines < static_cast<int>(x.size()),
          "detector: both human and machine samples are required");
}

}  // namespace

const char* DetectorKindName(DetectorKind k) {
  return k == DetectorKind::kLda ? "lda" : "logistic";
}

DetectorKind ParseDetectorKind(const std::string& name) {
  if (name == "lda") return DetectorKind::kLda;
  if (name == "logistic") return DetectorKind::kLogistic;
  throw Error(ErrorKind::kInvalidArgument, "unknown detector kind: " + name);
}

double MachineDetector::Score(std::span<const double> x) const {
  Require(x.size() == weights.size(), "detector: embedding width mismatch");
  double s = bias;
  for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * (x[i] - center[i]) / scale[i];
  return s;
}

void to_json(nlohmann::json& j, const MachineDetector& d) {
  j = {{"kind", DetectorKindName(d.kind)},
       {"center", d.center},
       {"scale", d.scale},
       {"weights", d.weights},
       {"bias", d.bias}};
}

void from_json(const nlohmann::json& j, MachineDetector& d) {
  d.kind = ParseDetectorKind(j.at("kind").get<std::string>());
  d.center = j.at("center").get<std::vector<double>>();
  d.scale = j.at("scale").get<std::vector<double>>();
  d.weights = j.at("weights").get<std::vector<double>>();
  d.bias = j.at("bias").get<double>();
  Require(d.center.size() == d.weights.size() && d.scale.size() == d.weights.size(),
          "detector: inconsistent parameter widths");
}

MachineDetector FitLda(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double shrinkage) {
  CheckInput(x, y);
  Require(shrinkage > 0.0, "detector: shrinkage must be positive");
  const int d = static_cast<int>(x.front().size());
  Eigen::VectorXd mu[2] = {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  int count[2] = {0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    mu[y[i]] += Eigen::Map<const Eigen::VectorXd>(x[i].data(), d);
    ++count[y[i]];
  }
  mu[0] /= count[0];
  mu[1] /= count[1];
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(x[i].data(), d) - mu[y[i]];
    sw.selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  sw = sw.selfadjointView<Eigen::Lower>();
  sw /= static_cast<double>(x.size());
  double ridge = shrinkage * sw.trace() / d;
  if (!(ridge > 0.0)) ridge = shrinkage;  // no within-class spread at all
  sw.diagonal().array() += ridge;
  const Eigen::VectorXd w = sw.ldlt().solve(mu[1] - mu[0]);

  MachineDetector det;
  det.kind = DetectorKind::kLda;
  det.center.assign(d, 0.0);
  det.scale.assign(d, 1.0);
  det.weights.assign(w.data(), w.data() + d);
  det.bias = -0.5 * w.dot(mu[0] + mu[1]);
  return det;
}

MachineDetector FitLogistic(const std::vector<std::vector<double>>& x,
                            const std::vector<int>& y, double l2, int iterations,
                            double step) {
  CheckInput(x, y);
  const std::size_t n = x.size(), d = x.front().size();
  MachineDetector det;
  det.kind = DetectorKind::kLogistic;
  det.center.assign(d, 0.0);
  det.scale.assign(d, 0.0);
  for (const auto& row : x) {
    for (std::size_t k = 0; k < d; ++k) det.center[k] += row[k] / n;
  }
  for (const auto& row : x) {
    for (std::size_t k = 0; k < d; ++k) {
      det.scale[k] += (row[k] - det.center[k]) * (row[k] - det.center[k]) / n;
    }
  }
  for (double& s : det.scale) s = s > 1e-24 ? std::sqrt(s) : 1.0;
  Eigen::MatrixXd z(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) z(i, k) = (x[i][k] - det.center[k]) / det.scale[k];
  }
  Eigen::VectorXd target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = y[i];
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd p =
        (1.0 + (-(z * w).array() - b).exp()).inverse().matrix();
    const Eigen::VectorXd r = p - target;
    w -= step * (z.transpose() * r / static_cast<double>(n) + l2 * w);
    b -= step * r.mean();
  }
  det.weights.assign(w.data(), w.data() + d);
  det.bias = b;
  return det;
}

double Accuracy(const MachineDetector& d, const std::vector<std::vector<double>>& x,
                const std::vector<int>& labels) {
  Require(!x.empty() && x.size() == labels.size(), "detector: need one label per sample");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ok += (d.IsMachine(x[i]) ? 1 : 0) == labels[i];
  return static_cast<double>(ok) / x.size();
}

}  // namespace bcauth::bcsr
