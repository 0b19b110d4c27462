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

#include <cmath>
#include <random>
#include <vector>

#include "bcauth/bcsr/network.h"
#include "bcauth/error.h"
#include "bcauth/kernels/conv2d.h"
#include "doctest.h"
#include "gradcheck.h"

namespace bcauth::bcsr {
namespace {

using testing::MakeBatch;
using testing::ToyBatch;
using testing::ToySpec;
using testing::CheckGradients;
using testing::CheckLambdaZero;
using testing::GradCheck;
using testing::LambdaZeroCheck;

TEST_CASE("every parameter gradient matches central differences") {
  const GradCheck g = CheckGradients();
  for (const std::string& m : g.mismatches) MESSAGE(m);
  CHECK(g.checked > 200);
  CHECK(g.mismatches.empty());
  CHECK(g.max_rel_error < 1e-4);
}

TEST_CASE("lambda zero reduces to plain speaker cross-entropy") {
  const LambdaZeroCheck z = CheckLambdaZero();
  CHECK(z.total_equals_speaker);
  CHECK(z.ce_abs_error < 1e-12);
  CHECK(z.condition_labels_irrelevant);
}

TEST_CASE("reversal flips the condition branch contribution") {
  const double lambda = 0.7;
  Network<double> net(ToySpec(lambda));
  net.Init(21);
  const int batch = 3;
  const ToyBatch b = MakeBatch(net, batch, 4);
  std::vector<std::vector<double>> rev, fwd, spk;
  net.ForwardBackward(b.x.data(), batch, b.speaker.data(), b.condition.data(),
                      {1.0, lambda, true}, &rev);
  net.ForwardBackward(b.x.data(), batch, b.speaker.data(), b.condition.data(),
                      {1.0, lambda, false}, &fwd);
  net.ForwardBackward(b.x.data(), batch, b.speaker.data(), b.condition.data(),
                      {1.0, 0.0, true}, &spk);
  double max_err = 0.0;
  for (std::size_t pi = 0; pi < net.params().size(); ++pi) {
    if (net.params()[pi].group != ParamGroup::kFeature) continue;
    for (std::size_t k = 0; k < rev[pi].size(); ++k) {
      const double with_rev = rev[pi][k] - spk[pi][k];
      const double without = fwd[pi][k] - spk[pi][k];
      max_err = std::max(max_err, std::abs(with_rev + without));
      // total == L_s part - lambda * (unreversed L_v part / lambda)
      max_err = std::max(max_err, std::abs(rev[pi][k] - (spk[pi][k] - without)));
    }
  }
  CHECK(max_err < 1e-9);
}

TEST_CASE("label range and shape validation") {
  Network<double> net(ToySpec());
  net.Init(1);
  const ToyBatch b = MakeBatch(net, 1, 1);
  const int bad_speaker = 3, cond = 0;
  CHECK_THROWS_AS(net.ForwardBackward(b.x.data(), 1, &bad_speaker, &cond, {}, nullptr),
                  Error);
  NetworkSpec s = ToySpec();
  s.num_speakers = 1;
  CHECK_THROWS_AS(Network<double>{s}, Error);
  s = ToySpec();
  s.speaker_ids = {"a", "b"};
  CHECK_THROWS_AS(Network<double>{s}, Error);
}

TEST_CASE("default architecture has the expected head widths") {
  NetworkSpec s;
  s.num_speakers = 8;
  Network<float> net(s);
  CHECK(s.pooled_h() == 71);
  CHECK(s.pooled_w() == 100);
  CHECK(s.feature_dim() == 64 * 9);
  int fc1 = -1, fc2 = -1, cv2 = -1;
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    if (net.params()[i].name == "speaker.fc1.w") fc1 = static_cast<int>(i);
    if (net.params()[i].name == "speaker.fc2.w") fc2 = static_cast<int>(i);
    if (net.params()[i].name == "condition.fc2.w") cv2 = static_cast<int>(i);
  }
  REQUIRE(fc1 >= 0);
  CHECK(net.params()[fc1].shape[0] == 512);
  CHECK(net.params()[fc2].shape[0] == 8);
  CHECK(net.params()[cv2].shape[0] == 4);
  nlohmann::json j = s;
  CHECK(j.get<NetworkSpec>().feature_dim() == s.feature_dim());
}

TEST_CASE("batched convolution matches the direct reference") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const kernels::Conv2dShape s :
       {kernels::Conv2dShape{3, 4, 9, 11, 3, 1, 1}, kernels::Conv2dShape{2, 5, 8, 7, 3, 2, 1},
        kernels::Conv2dShape{4, 3, 6, 6, 1, 2, 0}}) {
    const int batch = 3;
    std::vector<double> in(s.in_size() * batch), w(s.weight_size()),
        bias(s.out_channels), dout(s.out_size() * batch);
    for (auto* v : {&in, &w, &bias, &dout}) for (double& x : *v) x = g(rng);
    std::vector<double> out(s.out_size() * batch), ref(s.out_size() * batch);
    kernels::Conv2dForward(s, batch, in.data(), w.data(), bias.data(), out.data());
    for (int b = 0; b < batch; ++b) {
      kernels::Conv2dForwardReference(s, in.data() + b * s.in_size(), w.data(),
                                      bias.data(), ref.data() + b * s.out_size());
    }
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-12));

    std::vector<double> din(in.size()), din_ref(in.size());
    std::vector<double> dw(w.size(), 0.0), dw_ref(w.size(), 0.0);
    std::vector<double> db(bias.size(), 0.0), db_ref(bias.size(), 0.0);
    kernels::Conv2dBackward(s, batch, in.data(), w.data(), dout.data(), din.data(),
                            dw.data(), db.data());
    for (int b = 0; b < batch; ++b) {
      kernels::Conv2dBackwardReference(s, in.data() + b * s.in_size(), w.data(),
                                       dout.data() + b * s.out_size(),
                                       din_ref.data() + b * s.in_size(),
                                       dw_ref.data(), db_ref.data());
    }
    for (std::size_t i = 0; i < din.size(); ++i) CHECK(din[i] == doctest::Approx(din_ref[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < dw.size(); ++i) CHECK(dw[i] == doctest::Approx(dw_ref[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < db.size(); ++i) CHECK(db[i] == doctest::Approx(db_ref[i]).epsilon(1e-12));
  }
}

}  // namespace
}  // namespace bcauth::bcsr
