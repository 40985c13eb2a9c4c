// dsv/nnet-layers.h

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

#ifndef DSV_NNET_LAYERS_H_
#define DSV_NNET_LAYERS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dsv/feature-matrix.h"
#include "dsv/rng.h"

namespace dsv {

/// 1-D convolution over time with "same" zero padding:
///   y(o, t) = b(o) + sum_i sum_k W_k(o, i) x(i, t + k - (K-1)/2)
/// All parameters are plain matrices (bias is C_out x 1) so optimizers and
/// gradient checks can treat every tensor alike.
class Conv1dLayer {
 public:
  Conv1dLayer() = default;
  Conv1dLayer(int64_t in_channels, int64_t out_channels, int kernel);

  int64_t InChannels() const { return weights_.front().cols(); }
  int64_t OutChannels() const { return weights_.front().rows(); }
  int Kernel() const { return static_cast<int>(weights_.size()); }

  /// Weight tap k, C_out x C_in, applied to input frame t + k - (K-1)/2.
  Matrix &weight(int k) { return weights_[k]; }
  const Matrix &weight(int k) const { return weights_[k]; }
  Matrix &bias() { return bias_; }
  const Matrix &bias() const { return bias_; }

  /// Uniform in +-1/sqrt(C_in * K), zero bias.
  void InitRandom(Rng *rng);

  Matrix Forward(const Matrix &x) const;

  /// Accumulates dW into grad_weights[k] and db into grad_bias (both must be
  /// shaped like the parameters); returns dL/dx.
  Matrix Backward(const Matrix &grad_y, const Matrix &x,
                  std::span<Matrix> grad_weights, Matrix *grad_bias) const;

 private:
  std::vector<Matrix> weights_;
  Matrix bias_;
};

Matrix ReluForward(const Matrix &x);
/// Passes gradient where the forward input was strictly positive.
Matrix ReluBackward(const Matrix &grad_y, const Matrix &x);

/// Affine classifier, logits = W e + b.
class AffineLayer {
 public:
  AffineLayer() = default;
  AffineLayer(int64_t input_dim, int64_t output_dim);

  int64_t InputDim() const { return weight_.cols(); }
  int64_t OutputDim() const { return weight_.rows(); }
  Matrix &weight() { return weight_; }
  const Matrix &weight() const { return weight_; }
  Matrix &bias() { return bias_; }
  const Matrix &bias() const { return bias_; }

  /// Uniform in +-scale/sqrt(input_dim), zero bias.
  void InitRandom(Rng *rng, double scale = 1.0);

  Vector Forward(const Vector &e) const;
  Vector Backward(const Vector &grad_logits, const Vector &e, Matrix *grad_weight,
                  Matrix *grad_bias) const;

 private:
  Matrix weight_;
  Matrix bias_;
};

/// Softmax cross-entropy of `logits` against class `label`; writes
/// dL/dlogits = softmax - onehot when grad is non-null.
double SoftmaxCrossEntropy(const Vector &logits, int64_t label, Vector *grad);

}  // namespace dsv

#endif  // DSV_NNET_LAYERS_H_
