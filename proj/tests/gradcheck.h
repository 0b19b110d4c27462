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

// Finite-difference and lambda = 0 checks on a toy network, shared by the
// unit tests and the acceptance run.

#ifndef BCAUTH_TESTS_GRADCHECK_H_
#define BCAUTH_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bcauth/bcsr/network.h"

namespace bcauth::testing {

using bcsr::LossValue;
using bcsr::Network;
using bcsr::NetworkSpec;
using bcsr::ParamGroup;

inline NetworkSpec ToySpec(double lambda = 0.3) {
  NetworkSpec s;
  s.in_bins = 10;
  s.in_frames = 12;
  s.pool_f = 2;
  s.pool_t = 2;
  s.stem_channels = 2;
  s.block_channels = {2, 3, 3};
  s.embed_dim = 4;
  s.cond_hidden = 5;
  s.num_speakers = 3;
  s.num_conditions = 4;
  s.lambda = lambda;
  return s;
}

struct ToyBatch {
  std::vector<double> x;
  std::vector<int> speaker, condition;
};

inline ToyBatch MakeBatch(const Network<double>& net, int batch, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ToyBatch b;
  b.x.resize(net.input_size() * batch);
  for (double& v : b.x) v = g(rng);
  for (int i = 0; i < batch; ++i) {
    b.speaker.push_back(static_cast<int>(rng() % net.spec().num_speakers));
    b.condition.push_back(static_cast<int>(rng() % net.spec().num_conditions));
  }
  return b;
}

// Scalar objective whose exact derivative each parameter group receives:
// feature params get d(L_s - lambda L_v), speaker params dL_s, condition
// params dL_v.
inline double Objective(const Network<double>& net, const ToyBatch& b, int batch,
                 ParamGroup group, double lambda) {
  const LossValue lv = net.ForwardBackward(b.x.data(), batch, b.speaker.data(),
                                           b.condition.data(),
                                           {1.0, lambda, true}, nullptr);
  switch (group) {
    case ParamGroup::kFeature: return lv.speaker - lambda * lv.condition;
    case ParamGroup::kSpeaker: return lv.speaker;
    case ParamGroup::kCondition: return lv.condition;
  }
  return 0.0;
}

struct GradCheck {
  int checked = 0;
  double max_rel_error = 0.0;  // |a - n| / max(|a|, |n|, 1e-5)
  std::vector<std::string> mismatches;
};

inline GradCheck CheckGradients(double lambda = 0.3) {
  Network<double> net(ToySpec(lambda));
  net.Init(11);
  // Nonzero biases so no bias is at a symmetric point.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto& p : net.params()) {
    if (p.shape.size() == 1) for (double& v : p.data) v = u(rng);
  }
  // Batch seed chosen so no ReLU pre-activation sits within the step of
  // zero; at a kink the central difference averages two one-sided slopes.
  const int batch = 3;
  const ToyBatch b = MakeBatch(net, batch, 8);
  std::vector<std::vector<double>> grads;
  net.ForwardBackward(b.x.data(), batch, b.speaker.data(), b.condition.data(),
                      {1.0, lambda, true}, &grads);

  const double h = 1e-6;
  GradCheck out;
  for (std::size_t pi = 0; pi < net.params().size(); ++pi) {
    auto& p = net.params()[pi];
    for (std::size_t k = 0; k < p.data.size(); ++k) {
      const double saved = p.data[k];
      p.data[k] = saved + h;
      const double up = Objective(net, b, batch, p.group, lambda);
      p.data[k] = saved - h;
      const double down = Objective(net, b, batch, p.group, lambda);
      p.data[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grads[pi][k];
      const double scale = std::max(std::abs(numeric), std::abs(analytic));
      // Gradients below 1e-5 are compared absolutely.
      out.max_rel_error = std::max(out.max_rel_error,
                                   std::abs(numeric - analytic) / std::max(scale, 1e-5));
      if (std::abs(numeric - analytic) > 1e-4 * scale + 1e-9) {
        std::ostringstream m;
        m << p.name << "[" << k << "] analytic " << analytic << " numeric " << numeric;
        out.mismatches.push_back(m.str());
      }
      ++out.checked;
    }
  }
  return out;
}

struct LambdaZeroCheck {
  bool total_equals_speaker = false;
  double ce_abs_error = 0.0;
  // Non-condition gradients are bit-identical when only condition labels change.
  bool condition_labels_irrelevant = false;
};

inline LambdaZeroCheck CheckLambdaZero() {
  Network<double> net(ToySpec(0.0));
  net.Init(3);
  const int batch = 4;
  const ToyBatch b = MakeBatch(net, batch, 9);
  std::vector<std::vector<double>> g0;
  const LossValue lv = net.ForwardBackward(b.x.data(), batch, b.speaker.data(),
                                           b.condition.data(), {1.0, 0.0, true}, &g0);
  LambdaZeroCheck out;
  out.total_equals_speaker = lv.total == lv.speaker;

  // Independent cross-entropy from the forward outputs.
  double ce = 0.0;
  for (int i = 0; i < batch; ++i) {
    const bcsr::ForwardOutputs o = net.Forward(b.x.data() + i * net.input_size());
    double mx = o.logits[0];
    for (double z : o.logits) mx = std::max(mx, z);
    double sum = 0.0;
    for (double z : o.logits) sum += std::exp(z - mx);
    ce += -(o.logits[b.speaker[i]] - mx - std::log(sum));
  }
  out.ce_abs_error = std::abs(lv.speaker - ce / batch);

  ToyBatch other = b;
  for (int& c : other.condition) c = (c + 1) % 4;
  std::vector<std::vector<double>> g1;
  net.ForwardBackward(other.x.data(), batch, other.speaker.data(),
                      other.condition.data(), {1.0, 0.0, true}, &g1);
  out.condition_labels_irrelevant = true;
  for (std::size_t pi = 0; pi < net.params().size(); ++pi) {
    if (net.params()[pi].group == ParamGroup::kCondition) continue;
    out.condition_labels_irrelevant = out.condition_labels_irrelevant && g0[pi] == g1[pi];
  }
  return out;
}

}  // namespace bcauth::testing

#endif  // BCAUTH_TESTS_GRADCHECK_H_
