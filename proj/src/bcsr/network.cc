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

#include "bcauth/bcsr/network.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Core>

#include "bcauth/error.h"

namespace bcauth::bcsr {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Map = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;

int StrideTwo(int n) { return (n - 1) / 2 + 1; }

template <typename T>
void Relu(const std::vector<T>& z, std::vector<T>& a) {
  a.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > T(0) ? z[i] : T(0);
}

// g *= (z > 0)
template <typename T>
void ReluBackward(const std::vector<T>& z, std::vector<T>& g) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i] > T(0))) g[i] = T(0);
  }
}

// Row-wise softmax and mean cross-entropy; writes probabilities.
template <typename T>
double SoftmaxXent(const std::vector<T>& logits, int batch, int width,
                   const int* labels, std::vector<T>& prob, int* correct) {
  prob.resize(logits.size());
  double loss = 0.0;
  *correct = 0;
  for (int b = 0; b < batch; ++b) {
    const T* z = logits.data() + static_cast<std::size_t>(b) * width;
    T* p = prob.data() + static_cast<std::size_t>(b) * width;
    const T mx = *std::max_element(z, z + width);
    double sum = 0.0;
    for (int k = 0; k < width; ++k) sum += std::exp(static_cast<double>(z[k] - mx));
    for (int k = 0; k < width; ++k) {
      p[k] = static_cast<T>(std::exp(static_cast<double>(z[k] - mx)) / sum);
    }
    if (labels) {
      const int y = labels[b];
      loss += -(static_cast<double>(z[y] - mx) - std::log(sum));
      *correct += static_cast<int>(std::max_element(z, z + width) - z) == y;
    }
  }
  return loss / batch;
}

}  // namespace

void NetworkSpec::Validate() const {
  Require(pool_f >= 1 && pool_t >= 1, "network: pooling factors must be >= 1");
  Require(pooled_h() >= 1 && pooled_w() >= 1, "network: input smaller than pooling");
  Require(stem_channels >= 1 && block_channels[0] >= 1 && block_channels[1] >= 1 &&
              block_channels[2] >= 1,
          "network: channel counts must be >= 1");
  Require(embed_dim >= 1 && cond_hidden >= 1, "network: head widths must be >= 1");
  Require(num_speakers >= 2, "network: need at least 2 training speakers");
  Require(num_conditions >= 1, "network: need at least 1 condition label");
  Require(lambda >= 0.0, "network: lambda must be >= 0");
  Require(speaker_ids.empty() ||
              static_cast<int>(speaker_ids.size()) == num_speakers,
          "network: speaker_ids must match num_speakers");
}

int NetworkSpec::height(int stage) const {
  int h = pooled_h();
  for (int i = 0; i < stage; ++i) h = StrideTwo(h);
  return h;
}

int NetworkSpec::width(int stage) const {
  int w = pooled_w();
  for (int i = 0; i < stage; ++i) w = StrideTwo(w);
  return w;
}

void to_json(nlohmann::json& j, const NetworkSpec& s) {
  j = {{"in_bins", s.in_bins},
       {"in_frames", s.in_frames},
       {"pool_f", s.pool_f},
       {"pool_t", s.pool_t},
       {"stem_channels", s.stem_channels},
       {"block_channels", s.block_channels},
       {"embed_dim", s.embed_dim},
       {"cond_hidden", s.cond_hidden},
       {"num_speakers", s.num_speakers},
       {"num_conditions", s.num_conditions},
       {"lambda", s.lambda},
       {"speaker_ids", s.speaker_ids}};
}

void from_json(const nlohmann::json& j, NetworkSpec& s) {
  const NetworkSpec d;
  s.in_bins = j.value("in_bins", d.in_bins);
  s.in_frames = j.value("in_frames", d.in_frames);
  s.pool_f = j.value("pool_f", d.pool_f);
  s.pool_t = j.value("pool_t", d.pool_t);
  s.stem_channels = j.value("stem_channels", d.stem_channels);
  s.block_channels = j.value("block_channels", d.block_channels);
  s.embed_dim = j.value("embed_dim", d.embed_dim);
  s.cond_hidden = j.value("cond_hidden", d.cond_hidden);
  s.num_speakers = j.value("num_speakers", d.num_speakers);
  s.num_conditions = j.value("num_conditions", d.num_conditions);
  s.lambda = j.value("lambda", d.lambda);
  s.speaker_ids = j.value("speaker_ids", std::vector<std::string>{});
}

const char* LayerTagName(LayerTag t) {
  switch (t) {
    case LayerTag::kLayer1: return "layer-1";
    case LayerTag::kLayer2: return "layer-2";
    case LayerTag::kLayer3: return "layer-3";
  }
  return "unknown";
}

LayerTag ParseLayerTag(const std::string& name) {
  for (LayerTag t : {LayerTag::kLayer1, LayerTag::kLayer2, LayerTag::kLayer3}) {
    if (name == LayerTagName(t)) return t;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown layer tag: " + name);
}

template <typename T>
struct Network<T>::Trace {
  int batch = 0;
  std::vector<T> x0, z0, a0;
  struct BlockTrace {
    std::vector<T> za, ra, zb, zs, zsum, out;
  };
  std::array<BlockTrace, 3> blocks;
  std::vector<T> f, z1, a1, logits, prob, v1, va1, vlogits, vprob;
};

template <typename T>
int Network<T>::AddParam(const std::string& name, std::vector<int> shape,
                         ParamGroup g) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  params_.push_back({name, std::move(shape), g, std::vector<T>(n, T(0))});
  return static_cast<int>(params_.size()) - 1;
}

template <typename T>
Network<T>::Network(const NetworkSpec& spec) : spec_(spec) {
  spec_.Validate();
  const auto conv = [](int cin, int cout, int h, int w, int k, int stride, int pad) {
    kernels::Conv2dShape s{cin, cout, h, w, k, stride, pad};
    s.Validate();
    return s;
  };
  const int c0 = spec_.stem_channels;
  stem_ = conv(1, c0, spec_.height(0), spec_.width(0), 3, 1, 1);
  stem_w_ = AddParam("stem.w", {c0, 1, 3, 3}, ParamGroup::kFeature);
  stem_b_ = AddParam("stem.b", {c0}, ParamGroup::kFeature);
  int cin = c0;
  for (int i = 0; i < 3; ++i) {
    const int cout = spec_.block_channels[i];
    const int h = spec_.height(i), w = spec_.width(i);
    Block& b = blocks_[i];
    const std::string p = "block" + std::to_string(i + 1) + ".";
    b.a = conv(cin, cout, h, w, 3, 2, 1);
    b.b = conv(cout, cout, b.a.out_h(), b.a.out_w(), 3, 1, 1);
    b.shortcut = conv(cin, cout, h, w, 1, 2, 0);
    b.wa = AddParam(p + "conv_a.w", {cout, cin, 3, 3}, ParamGroup::kFeature);
    b.ba = AddParam(p + "conv_a.b", {cout}, ParamGroup::kFeature);
    b.wb = AddParam(p + "conv_b.w", {cout, cout, 3, 3}, ParamGroup::kFeature);
    b.bb = AddParam(p + "conv_b.b", {cout}, ParamGroup::kFeature);
    b.ws = AddParam(p + "shortcut.w", {cout, cin, 1, 1}, ParamGroup::kFeature);
    b.bs = AddParam(p + "shortcut.b", {cout}, ParamGroup::kFeature);
    cin = cout;
  }
  const int d = spec_.feature_dim();
  fc1_w_ = AddParam("speaker.fc1.w", {spec_.embed_dim, d}, ParamGroup::kSpeaker);
  fc1_b_ = AddParam("speaker.fc1.b", {spec_.embed_dim}, ParamGroup::kSpeaker);
  fc2_w_ = AddParam("speaker.fc2.w", {spec_.num_speakers, spec_.embed_dim},
                    ParamGroup::kSpeaker);
  fc2_b_ = AddParam("speaker.fc2.b", {spec_.num_speakers}, ParamGroup::kSpeaker);
  cv1_w_ = AddParam("condition.fc1.w", {spec_.cond_hidden, d}, ParamGroup::kCondition);
  cv1_b_ = AddParam("condition.fc1.b", {spec_.cond_hidden}, ParamGroup::kCondition);
  cv2_w_ = AddParam("condition.fc2.w", {spec_.num_conditions, spec_.cond_hidden},
                    ParamGroup::kCondition);
  cv2_b_ = AddParam("condition.fc2.b", {spec_.num_conditions}, ParamGroup::kCondition);
}

template <typename T>
void Network<T>::Init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (Tensor<T>& p : params_) {
    if (p.shape.size() == 1) {
      std::fill(p.data.begin(), p.data.end(), T(0));
      continue;
    }
    std::size_t fan_in = 1;
    for (std::size_t k = 1; k < p.shape.size(); ++k) fan_in *= p.shape[k];
    std::normal_distribution<double> g(0.0, std::sqrt(2.0 / fan_in));
    for (T& v : p.data) v = static_cast<T>(g(rng));
  }
}

template <typename T>
std::vector<std::vector<T>> Network<T>::ZeroGrads() const {
  std::vector<std::vector<T>> g;
  for (const Tensor<T>& p : params_) g.emplace_back(p.data.size(), T(0));
  return g;
}

template <typename T>
void Network<T>::Run(const T* inputs, int batch, Trace& tr) const {
  tr.batch = batch;
  const int h0 = spec_.height(0), w0 = spec_.width(0);
  const int pf = spec_.pool_f, pt = spec_.pool_t;
  tr.x0.assign(static_cast<std::size_t>(batch) * h0 * w0, T(0));
  const T scale = T(1) / static_cast<T>(pf * pt);
  for (int b = 0; b < batch; ++b) {
    const T* in = inputs + b * input_size();
    T* x = tr.x0.data() + static_cast<std::size_t>(b) * h0 * w0;
    for (int h = 0; h < h0; ++h) {
      for (int f = h * pf; f < (h + 1) * pf; ++f) {
        const T* row = in + static_cast<std::size_t>(f) * spec_.in_frames;
        for (int w = 0; w < w0; ++w) {
          T acc = T(0);
          for (int t = w * pt; t < (w + 1) * pt; ++t) acc += row[t];
          x[h * w0 + w] += acc * scale;
        }
      }
    }
  }

  const auto conv = [&](const kernels::Conv2dShape& s, const T* in, int wi, int bi,
                        std::vector<T>& out) {
    out.resize(s.out_size() * batch);
    kernels::Conv2dForward(s, batch, in, params_[wi].data.data(),
                           params_[bi].data.data(), out.data());
  };
  conv(stem_, tr.x0.data(), stem_w_, stem_b_, tr.z0);
  Relu(tr.z0, tr.a0);
  const std::vector<T>* in = &tr.a0;
  for (int i = 0; i < 3; ++i) {
    const Block& bl = blocks_[i];
    auto& bt = tr.blocks[i];
    conv(bl.a, in->data(), bl.wa, bl.ba, bt.za);
    Relu(bt.za, bt.ra);
    conv(bl.b, bt.ra.data(), bl.wb, bl.bb, bt.zb);
    conv(bl.shortcut, in->data(), bl.ws, bl.bs, bt.zs);
    bt.zsum.resize(bt.zb.size());
    for (std::size_t k = 0; k < bt.zb.size(); ++k) bt.zsum[k] = bt.zb[k] + bt.zs[k];
    Relu(bt.zsum, bt.out);
    in = &bt.out;
  }

  // Mean over time.
  const int c3 = spec_.block_channels[2], h3 = spec_.height(3), w3 = spec_.width(3);
  const int d = spec_.feature_dim();
  tr.f.assign(static_cast<std::size_t>(batch) * d, T(0));
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < c3; ++c) {
      for (int h = 0; h < h3; ++h) {
        const T* row = in->data() + ((static_cast<std::size_t>(b) * c3 + c) * h3 + h) * w3;
        T acc = T(0);
        for (int w = 0; w < w3; ++w) acc += row[w];
        tr.f[static_cast<std::size_t>(b) * d + c * h3 + h] = acc / static_cast<T>(w3);
      }
    }
  }

  const auto fc = [&](const std::vector<T>& x, int in_dim, int wi, int bi, int out_dim,
                      std::vector<T>& y) {
    y.resize(static_cast<std::size_t>(batch) * out_dim);
    Map<T> ym(y.data(), batch, out_dim);
    ym.noalias() = ConstMap<T>(x.data(), batch, in_dim) *
                   ConstMap<T>(params_[wi].data.data(), out_dim, in_dim).transpose();
    ym.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(
        params_[bi].data.data(), out_dim);
  };
  fc(tr.f, d, fc1_w_, fc1_b_, spec_.embed_dim, tr.z1);
  Relu(tr.z1, tr.a1);
  fc(tr.a1, spec_.embed_dim, fc2_w_, fc2_b_, spec_.num_speakers, tr.logits);
  fc(tr.f, d, cv1_w_, cv1_b_, spec_.cond_hidden, tr.v1);
  Relu(tr.v1, tr.va1);
  fc(tr.va1, spec_.cond_hidden, cv2_w_, cv2_b_, spec_.num_conditions, tr.vlogits);
}

template <typename T>
LossValue Network<T>::ForwardBackward(const T* inputs, int batch, const int* speaker,
                                      const int* condition, const LossWeights& lw,
                                      std::vector<std::vector<T>>* grads) const {
  Require(batch >= 1, "network: empty batch");
  for (int b = 0; b < batch; ++b) {
    Require(speaker[b] >= 0 && speaker[b] < spec_.num_speakers,
            "network: speaker label out of range");
    Require(condition[b] >= 0 && condition[b] < spec_.num_conditions,
            "network: condition label out of range");
  }
  Trace tr;
  Run(inputs, batch, tr);
  LossValue lv;
  lv.speaker = SoftmaxXent(tr.logits, batch, spec_.num_speakers, speaker, tr.prob,
                           &lv.speaker_correct);
  lv.condition = SoftmaxXent(tr.vlogits, batch, spec_.num_conditions, condition,
                             tr.vprob, &lv.condition_correct);
  lv.total = lw.speaker * lv.speaker - lw.lambda * lv.condition;
  if (!grads) return lv;

  *grads = ZeroGrads();
  auto& g = *grads;
  const int d = spec_.feature_dim();
  // Cross-entropy gradients wrt logits.
  const auto dlogits = [&](const std::vector<T>& prob, const int* labels, int width,
                           double scale) {
    std::vector<T> out(prob.size());
    for (int b = 0; b < batch; ++b) {
      for (int k = 0; k < width; ++k) {
        const std::size_t i = static_cast<std::size_t>(b) * width + k;
        out[i] = static_cast<T>((prob[i] - (k == labels[b] ? T(1) : T(0))) * scale / batch);
      }
    }
    return out;
  };
  // FC backward: accumulates weight/bias grads, returns d_in.
  const auto fc_back = [&](const std::vector<T>& x, int in_dim, int wi, int bi,
                           int out_dim, const std::vector<T>& dy) {
    const ConstMap<T> dym(dy.data(), batch, out_dim);
    Map<T>(g[wi].data(), out_dim, in_dim).noalias() +=
        dym.transpose() * ConstMap<T>(x.data(), batch, in_dim);
    for (int b = 0; b < batch; ++b) {
      for (int k = 0; k < out_dim; ++k) g[bi][k] += dy[static_cast<std::size_t>(b) * out_dim + k];
    }
    std::vector<T> dx(static_cast<std::size_t>(batch) * in_dim);
    Map<T>(dx.data(), batch, in_dim).noalias() =
        dym * ConstMap<T>(params_[wi].data.data(), out_dim, in_dim);
    return dx;
  };

  std::vector<T> dz2 = dlogits(tr.prob, speaker, spec_.num_speakers, lw.speaker);
  std::vector<T> da1 = fc_back(tr.a1, spec_.embed_dim, fc2_w_, fc2_b_, spec_.num_speakers, dz2);
  ReluBackward(tr.z1, da1);
  std::vector<T> df = fc_back(tr.f, d, fc1_w_, fc1_b_, spec_.embed_dim, da1);

  // The condition head descends on L_v; the extractor sees it through the
  // reversal boundary scaled by lambda.
  std::vector<T> dv2 = dlogits(tr.vprob, condition, spec_.num_conditions, 1.0);
  std::vector<T> dva1 = fc_back(tr.va1, spec_.cond_hidden, cv2_w_, cv2_b_,
                                spec_.num_conditions, dv2);
  ReluBackward(tr.v1, dva1);
  const std::vector<T> dfv = fc_back(tr.f, d, cv1_w_, cv1_b_, spec_.cond_hidden, dva1);
  const T sign = static_cast<T>(lw.reverse ? -lw.lambda : lw.lambda);
  for (std::size_t i = 0; i < df.size(); ++i) df[i] += sign * dfv[i];

  // Undo the time mean.
  const int c3 = spec_.block_channels[2], h3 = spec_.height(3), w3 = spec_.width(3);
  std::vector<T> dout(static_cast<std::size_t>(batch) * c3 * h3 * w3);
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < c3; ++c) {
      for (int h = 0; h < h3; ++h) {
        const T v = df[static_cast<std::size_t>(b) * d + c * h3 + h] / static_cast<T>(w3);
        T* row = dout.data() + ((static_cast<std::size_t>(b) * c3 + c) * h3 + h) * w3;
        std::fill(row, row + w3, v);
      }
    }
  }

  for (int i = 2; i >= 0; --i) {
    const Block& bl = blocks_[i];
    auto& bt = tr.blocks[i];
    const std::vector<T>& in = i == 0 ? tr.a0 : tr.blocks[i - 1].out;
    ReluBackward(bt.zsum, dout);
    std::vector<T> dra(bt.ra.size());
    kernels::Conv2dBackward(bl.b, batch, bt.ra.data(), params_[bl.wb].data.data(),
                            dout.data(), dra.data(), g[bl.wb].data(), g[bl.bb].data());
    std::vector<T> din(in.size()), din_sc(in.size());
    kernels::Conv2dBackward(bl.shortcut, batch, in.data(), params_[bl.ws].data.data(),
                            dout.data(), din_sc.data(), g[bl.ws].data(), g[bl.bs].data());
    ReluBackward(bt.za, dra);
    kernels::Conv2dBackward(bl.a, batch, in.data(), params_[bl.wa].data.data(),
                            dra.data(), din.data(), g[bl.wa].data(), g[bl.ba].data());
    for (std::size_t k = 0; k < din.size(); ++k) din[k] += din_sc[k];
    dout = std::move(din);
  }
  ReluBackward(tr.z0, dout);
  kernels::Conv2dBackward<T>(stem_, batch, tr.x0.data(), params_[stem_w_].data.data(),
                             dout.data(), nullptr, g[stem_w_].data(), g[stem_b_].data());
  return lv;
}

template <typename T>
ForwardOutputs Network<T>::Forward(const T* input) const {
  Trace tr;
  Run(input, 1, tr);
  int unused = 0;
  SoftmaxXent(tr.logits, 1, spec_.num_speakers, nullptr, tr.prob, &unused);
  SoftmaxXent(tr.vlogits, 1, spec_.num_conditions, nullptr, tr.vprob, &unused);
  const auto cast = [](const std::vector<T>& v) {
    return std::vector<double>(v.begin(), v.end());
  };
  return {cast(tr.f), cast(tr.a1), cast(tr.logits), cast(tr.prob), cast(tr.vprob)};
}

template class Network<float>;
template class Network<double>;

}  // namespace bcauth::bcsr
