// nnet-network.cc

// Copyright 2026  The dsv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "dsv/nnet-network.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsv/error.h"
#include "dsv/rng.h"

namespace dsv {

Architecture ParseArchitecture(std::string_view tag) {
  if (tag == "FE3C_mean") return Architecture::kFE3C_mean;
  if (tag == "Signal_align") return Architecture::kSignal_align;
  if (tag == "FE1C_k1_align") return Architecture::kFE1C_k1_align;
  if (tag == "FE1C_k3_align") return Architecture::kFE1C_k3_align;
  if (tag == "FE3C_k3_align") return Architecture::kFE3C_k3_align;
  DSV_ERR(kInvalidConfig) << "unknown architecture tag '" << tag << "'";
}

std::string_view ArchitectureTag(Architecture arch) {
  switch (arch) {
    case Architecture::kFE3C_mean: return "FE3C_mean";
    case Architecture::kSignal_align: return "Signal_align";
    case Architecture::kFE1C_k1_align: return "FE1C_k1_align";
    case Architecture::kFE1C_k3_align: return "FE1C_k3_align";
    case Architecture::kFE3C_k3_align: return "FE3C_k3_align";
  }
  return "unknown";
}

NetworkConfig NetworkConfig::ForArchitecture(Architecture arch, int64_t input_dim,
                                             int64_t width, int32_t num_states,
                                             int64_t num_classes) {
  NetworkConfig c;
  c.architecture = arch;
  c.input_dim = input_dim;
  c.num_states = num_states;
  c.num_classes = num_classes;
  c.head = arch == Architecture::kFE3C_mean ? PoolingHead::kMean : PoolingHead::kAlign;
  switch (arch) {
    case Architecture::kFE3C_mean:
    case Architecture::kFE3C_k3_align:
      c.widths = {width, width, width};
      c.kernels = {3, 3, 3};
      break;
    case Architecture::kFE1C_k1_align:
      c.widths = {width};
      c.kernels = {1};
      break;
    case Architecture::kFE1C_k3_align:
      c.widths = {width};
      c.kernels = {3};
      break;
    case Architecture::kSignal_align:
      break;
  }
  c.Validate();
  return c;
}

void NetworkConfig::Validate() const {
  if (widths.size() != kernels.size())
    DSV_ERR(kInvalidConfig) << "widths and kernels differ in length";
  if (input_dim < 1 || num_classes < 1 || num_states < 1)
    DSV_ERR(kInvalidConfig) << "input_dim, num_classes and num_states must be positive";
  for (size_t i = 0; i < widths.size(); ++i)
    if (widths[i] < 1 || kernels[i] < 1 || kernels[i] % 2 == 0)
      DSV_ERR(kInvalidConfig) << "layer " << i << ": bad width or even kernel";
  size_t want_layers = 0;
  int want_kernel = 3;
  PoolingHead want_head = PoolingHead::kAlign;
  switch (architecture) {
    case Architecture::kFE3C_mean:
      want_layers = 3;
      want_head = PoolingHead::kMean;
      break;
    case Architecture::kFE3C_k3_align: want_layers = 3; break;
    case Architecture::kFE1C_k1_align:
      want_layers = 1;
      want_kernel = 1;
      break;
    case Architecture::kFE1C_k3_align: want_layers = 1; break;
    case Architecture::kSignal_align: want_layers = 0; break;
  }
  if (widths.size() != want_layers || head != want_head ||
      std::any_of(kernels.begin(), kernels.end(),
                  [&](int k) { return k != want_kernel; }))
    DSV_ERR(kInvalidConfig) << "layer list does not match architecture "
                            << ArchitectureTag(architecture);
}

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  config_.Validate();
  int64_t in = config_.input_dim;
  for (size_t i = 0; i < config_.widths.size(); ++i) {
    layers_.emplace_back(in, config_.widths[i], config_.kernels[i]);
    in = config_.widths[i];
  }
  classifier_ = AffineLayer(config_.EmbeddingDim(), config_.num_classes);
}

void Network::InitRandom(Rng *rng, double classifier_scale) {
  for (auto &layer : layers_) layer.InitRandom(rng);
  classifier_.InitRandom(rng, classifier_scale);
}

std::vector<Matrix *> Network::Parameters() {
  std::vector<Matrix *> out;
  for (auto &layer : layers_) {
    for (int k = 0; k < layer.Kernel(); ++k) out.push_back(&layer.weight(k));
    out.push_back(&layer.bias());
  }
  out.push_back(&classifier_.weight());
  out.push_back(&classifier_.bias());
  return out;
}

std::vector<const Matrix *> Network::Parameters() const {
  auto mut = const_cast<Network *>(this)->Parameters();
  return {mut.begin(), mut.end()};
}

Gradients Network::ZeroGradients() const {
  Gradients g;
  for (const Matrix *p : Parameters()) g.push_back(Matrix::Zero(p->rows(), p->cols()));
  return g;
}

Matrix Network::FrontEnd(const Matrix &x) const {
  Matrix h = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].Forward(h);
    if (i + 1 < layers_.size()) h = ReluForward(h);
  }
  return h;
}

AlignmentMatrix Network::HeadAlignment(const AlignmentMatrix &align) const {
  return config_.head == PoolingHead::kMean ? AlignmentMatrix::SingleState(align.NumFrames())
                                            : align;
}

Vector Network::Embed(const Matrix &x, const AlignmentMatrix &align) const {
  if (config_.head == PoolingHead::kAlign && align.NumStates() != config_.num_states)
    DSV_ERR(kDimensionMismatch) << "alignment has " << align.NumStates()
                                << " states, network expects " << config_.num_states;
  return PoolSupervector(FrontEnd(x), HeadAlignment(align)).Flatten();
}

Vector Network::Logits(const Matrix &x, const AlignmentMatrix &align) const {
  return classifier_.Forward(Embed(x, align));
}

double Network::ForwardBackward(const Matrix &x, const AlignmentMatrix &align,
                                int64_t label, Gradients *grads,
                                Matrix *grad_input, Vector *logits_out) const {
  if (config_.head == PoolingHead::kAlign && align.NumStates() != config_.num_states)
    DSV_ERR(kDimensionMismatch) << "alignment has " << align.NumStates()
                                << " states, network expects " << config_.num_states;
  // inputs[i] is the input of conv layer i; pre[i] its output before ReLU.
  std::vector<Matrix> inputs, pre;
  Matrix h = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    inputs.push_back(h);
    pre.push_back(layers_[i].Forward(h));
    h = i + 1 < layers_.size() ? ReluForward(pre.back()) : pre.back();
  }
  const AlignmentMatrix head_align = HeadAlignment(align);
  const Supervector sv = PoolSupervector(h, head_align);
  const Vector embedding = sv.Flatten();
  const Vector logits = classifier_.Forward(embedding);
  if (logits_out) *logits_out = logits;
  Vector grad_logits;
  const double loss = SoftmaxCrossEntropy(logits, label, &grad_logits);

  Gradients &g = *grads;
  DSV_CHECK(g.size() == Parameters().size(), kDimensionMismatch);
  const size_t cls = g.size() - 2;
  const Vector grad_emb = classifier_.Backward(grad_logits, embedding, &g[cls], &g[cls + 1]);
  Matrix grad_h = PoolBackward(Supervector::Unflatten(grad_emb, h.rows()).per_state,
                               head_align);

  // Gradient slots of layer i start after all taps and biases of layers < i.
  std::vector<size_t> slot(layers_.size() + 1, 0);
  for (size_t i = 0; i < layers_.size(); ++i)
    slot[i + 1] = slot[i] + static_cast<size_t>(layers_[i].Kernel()) + 1;
  for (size_t i = layers_.size(); i-- > 0;) {
    if (i + 1 < layers_.size()) grad_h = ReluBackward(grad_h, pre[i]);
    const auto taps = std::span<Matrix>(g).subspan(slot[i], layers_[i].Kernel());
    Matrix &grad_bias = g[slot[i] + layers_[i].Kernel()];
    grad_h = layers_[i].Backward(grad_h, inputs[i], taps, &grad_bias);
  }
  if (grad_input) *grad_input = std::move(grad_h);
  return loss;
}

GradCheckReport CompareGradients(const std::vector<Matrix *> &tensors,
                                 const std::vector<Matrix> &analytic,
                                 const std::function<double()> &loss, double eps,
                                 int64_t max_coords_per_tensor, uint64_t seed) {
  DSV_CHECK(tensors.size() == analytic.size(), kDimensionMismatch);
  Rng rng(seed);
  GradCheckReport report;
  for (size_t i = 0; i < tensors.size(); ++i) {
    Matrix &p = *tensors[i];
    DSV_CHECK(p.size() == analytic[i].size(), kDimensionMismatch);
    std::vector<int64_t> coords(static_cast<size_t>(p.size()));
    std::iota(coords.begin(), coords.end(), 0);
    if (max_coords_per_tensor > 0 &&
        static_cast<int64_t>(coords.size()) > max_coords_per_tensor) {
      rng.Shuffle(&coords);
      coords.resize(static_cast<size_t>(max_coords_per_tensor));
    }
    double diff_sq = 0.0, ana_sq = 0.0, num_sq = 0.0;
    for (int64_t c : coords) {
      double &v = p.data()[c];
      const double saved = v;
      v = saved + eps;
      const double up = loss();
      v = saved - eps;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[i].data()[c];
      diff_sq += (a - numeric) * (a - numeric);
      ana_sq += a * a;
      num_sq += numeric * numeric;
    }
    const double denom = std::sqrt(std::max(ana_sq, num_sq));
    const double err = denom > 0.0 ? std::sqrt(diff_sq) / denom : 0.0;
    report.tensor_errors.push_back(err);
    report.max_relative_error = std::max(report.max_relative_error, err);
    report.coordinates_checked += static_cast<int64_t>(coords.size());
  }
  return report;
}

GradCheckReport GradCheckNetwork(
    const Network &net, const Matrix &x, const AlignmentMatrix &align,
    int64_t label, double eps, int64_t max_coords_per_tensor,
    const std::function<void(Gradients *, Matrix *)> &corrupt) {
  Network work = net;
  Matrix input = x;
  Gradients grads = work.ZeroGradients();
  Matrix grad_input;
  work.ForwardBackward(input, align, label, &grads, &grad_input);
  if (corrupt) corrupt(&grads, &grad_input);

  std::vector<Matrix *> tensors = work.Parameters();
  tensors.push_back(&input);
  grads.push_back(std::move(grad_input));
  auto loss = [&]() {
    return SoftmaxCrossEntropy(work.Logits(input, align), label, nullptr);
  };
  return CompareGradients(tensors, grads, loss, eps, max_coords_per_tensor, 0);
}

}  // namespace dsv
