// nnet-layers.cc

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

#include "dsv/nnet-layers.h"

#include <algorithm>
#include <cmath>

#include "dsv/error.h"

namespace dsv {

namespace {

// Frames t in [begin, begin + count) read input frame t + offset.
struct TapRange {
  int64_t begin;
  int64_t count;
};

TapRange ValidRange(int64_t frames, int64_t offset) {
  const int64_t begin = std::max<int64_t>(0, -offset);
  const int64_t end = std::min<int64_t>(frames, frames - offset);
  return {begin, std::max<int64_t>(0, end - begin)};
}

}  // namespace

Conv1dLayer::Conv1dLayer(int64_t in_channels, int64_t out_channels, int kernel) {
  if (in_channels < 1 || out_channels < 1)
    DSV_ERR(kInvalidArgument) << "conv layer needs positive channel counts";
  if (kernel < 1 || kernel % 2 == 0)
    DSV_ERR(kInvalidArgument) << "conv kernel must be odd, got " << kernel;
  weights_.assign(static_cast<size_t>(kernel), Matrix::Zero(out_channels, in_channels));
  bias_ = Matrix::Zero(out_channels, 1);
}

void Conv1dLayer::InitRandom(Rng *rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(InChannels() * Kernel()));
  for (auto &w : weights_)
    for (int64_t j = 0; j < w.cols(); ++j)
      for (int64_t i = 0; i < w.rows(); ++i) w(i, j) = rng->Uniform(-bound, bound);
  bias_.setZero();
}

Matrix Conv1dLayer::Forward(const Matrix &x) const {
  if (x.rows() != InChannels())
    DSV_ERR(kDimensionMismatch) << "conv input has " << x.rows()
                                << " channels, layer expects " << InChannels();
  const int64_t frames = x.cols();
  const int half = (Kernel() - 1) / 2;
  Matrix y = bias_.replicate(1, frames);
  for (int k = 0; k < Kernel(); ++k) {
    const int64_t offset = k - half;
    const TapRange r = ValidRange(frames, offset);
    if (r.count == 0) continue;
    y.middleCols(r.begin, r.count).noalias() +=
        weights_[k] * x.middleCols(r.begin + offset, r.count);
  }
  return y;
}

Matrix Conv1dLayer::Backward(const Matrix &grad_y, const Matrix &x,
                             std::span<Matrix> grad_weights,
                             Matrix *grad_bias) const {
  if (grad_y.rows() != OutChannels() || x.rows() != InChannels() ||
      grad_y.cols() != x.cols())
    DSV_ERR(kDimensionMismatch) << "conv backward shapes";
  DSV_CHECK(grad_weights.size() == weights_.size(), kDimensionMismatch);
  const int64_t frames = x.cols();
  const int half = (Kernel() - 1) / 2;
  Matrix grad_x = Matrix::Zero(x.rows(), frames);
  for (int k = 0; k < Kernel(); ++k) {
    const int64_t offset = k - half;
    const TapRange r = ValidRange(frames, offset);
    if (r.count == 0) continue;
    const auto gy = grad_y.middleCols(r.begin, r.count);
    grad_weights[k].noalias() +=
        gy * x.middleCols(r.begin + offset, r.count).transpose();
    grad_x.middleCols(r.begin + offset, r.count).noalias() +=
        weights_[k].transpose() * gy;
  }
  *grad_bias += grad_y.rowwise().sum();
  return grad_x;
}

Matrix ReluForward(const Matrix &x) { return x.cwiseMax(0.0); }

Matrix ReluBackward(const Matrix &grad_y, const Matrix &x) {
  if (grad_y.rows() != x.rows() || grad_y.cols() != x.cols())
    DSV_ERR(kDimensionMismatch) << "relu backward shapes";
  return (x.array() > 0.0).select(grad_y, 0.0);
}

AffineLayer::AffineLayer(int64_t input_dim, int64_t output_dim)
    : weight_(Matrix::Zero(output_dim, input_dim)),
      bias_(Matrix::Zero(output_dim, 1)) {
  if (input_dim < 1 || output_dim < 1)
    DSV_ERR(kInvalidArgument) << "affine layer needs positive dimensions";
}

void AffineLayer::InitRandom(Rng *rng, double scale) {
  const double bound = scale / std::sqrt(static_cast<double>(InputDim()));
  for (int64_t j = 0; j < weight_.cols(); ++j)
    for (int64_t i = 0; i < weight_.rows(); ++i)
      weight_(i, j) = rng->Uniform(-bound, bound);
  bias_.setZero();
}

Vector AffineLayer::Forward(const Vector &e) const {
  if (e.size() != InputDim())
    DSV_ERR(kDimensionMismatch) << "classifier input " << e.size() << " vs "
                                << InputDim();
  return weight_ * e + bias_.col(0);
}

Vector AffineLayer::Backward(const Vector &grad_logits, const Vector &e,
                             Matrix *grad_weight, Matrix *grad_bias) const {
  if (grad_logits.size() != OutputDim() || e.size() != InputDim())
    DSV_ERR(kDimensionMismatch) << "classifier backward shapes";
  grad_weight->noalias() += grad_logits * e.transpose();
  grad_bias->col(0) += grad_logits;
  return weight_.transpose() * grad_logits;
}

double SoftmaxCrossEntropy(const Vector &logits, int64_t label, Vector *grad) {
  if (label < 0 || label >= logits.size())
    DSV_ERR(kInvalidArgument) << "label " << label << " out of range";
  const double max = logits.maxCoeff();
  const Vector shifted = logits.array() - max;
  const double log_norm = std::log(shifted.array().exp().sum());
  if (grad) {
    *grad = (shifted.array() - log_norm).exp();
    (*grad)[label] -= 1.0;
  }
  return log_norm - shifted[label];
}

}  // namespace dsv
