// dsv/nnet-network.h

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

#ifndef DSV_NNET_NETWORK_H_
#define DSV_NNET_NETWORK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dsv/alignment.h"
#include "dsv/nnet-layers.h"

namespace dsv {

enum class Architecture {
  kFE3C_mean,
  kSignal_align,
  kFE1C_k1_align,
  kFE1C_k3_align,
  kFE3C_k3_align,
};

enum class PoolingHead { kMean, kAlign };

Architecture ParseArchitecture(std::string_view tag);
std::string_view ArchitectureTag(Architecture arch);

struct NetworkConfig {
  Architecture architecture = Architecture::kFE3C_k3_align;
  int64_t input_dim = 60;
  std::vector<int64_t> widths;  // output channels per conv layer
  std::vector<int> kernels;     // kernel size per conv layer
  PoolingHead head = PoolingHead::kAlign;
  int32_t num_states = 40;      // alignment states (ignored by the mean head)
  int64_t num_classes = 1;

  /// Layer list for an architecture tag: 3 conv layers of kernel 3 for
  /// FE3C_*, one layer of kernel 1 or 3 for FE1C_*, none for Signal_align.
  static NetworkConfig ForArchitecture(Architecture arch, int64_t input_dim,
                                       int64_t width, int32_t num_states,
                                       int64_t num_classes);

  /// Checks the layer list against the architecture tag.
  void Validate() const;

  int64_t EmbeddingChannels() const {
    return widths.empty() ? input_dim : widths.back();
  }
  int64_t EmbeddingDim() const {
    return EmbeddingChannels() * (head == PoolingHead::kAlign ? num_states : 1);
  }
};

/// Parameter gradients, shaped like Network::Parameters().
using Gradients = std::vector<Matrix>;

/**
   Front-end of 1-D convolutions (ReLU after every layer but the last), a
   pooling head, and a joint speaker x phrase classifier used only during
   training.

   The mean head is the alignment head with a single state covering every
   frame, so both heads share PoolSupervector / PoolBackward.
*/
class Network {
 public:
  Network() = default;
  explicit Network(NetworkConfig config);

  const NetworkConfig &config() const { return config_; }
  std::vector<Conv1dLayer> &layers() { return layers_; }
  const std::vector<Conv1dLayer> &layers() const { return layers_; }
  AffineLayer &classifier() { return classifier_; }
  const AffineLayer &classifier() const { return classifier_; }

  /// Conv weights uniform in +-1/sqrt(fan_in); the classifier gets the same
  /// rule scaled down by `classifier_scale` so initial logits are near zero.
  void InitRandom(Rng *rng, double classifier_scale = 0.1);

  /// Every trainable tensor in a fixed order: per conv layer its K taps then
  /// its bias; then classifier weight and bias.
  std::vector<Matrix *> Parameters();
  std::vector<const Matrix *> Parameters() const;
  Gradients ZeroGradients() const;

  /// Front-end output, C' x T.
  Matrix FrontEnd(const Matrix &x) const;

  /// The pooling alignment actually used: `align` for the align head, a
  /// single all-frames state for the mean head.
  AlignmentMatrix HeadAlignment(const AlignmentMatrix &align) const;

  /// Flat embedding (state-major supervector, or the mean vector).
  Vector Embed(const Matrix &x, const AlignmentMatrix &align) const;

  /// Logits of the classifier applied to the embedding.
  Vector Logits(const Matrix &x, const AlignmentMatrix &align) const;

  /// Cross-entropy for one example; accumulates parameter gradients into
  /// `grads` and, if non-null, writes dL/dx. `logits_out` receives the logits.
  double ForwardBackward(const Matrix &x, const AlignmentMatrix &align,
                         int64_t label, Gradients *grads,
                         Matrix *grad_input = nullptr,
                         Vector *logits_out = nullptr) const;

 private:
  NetworkConfig config_;
  std::vector<Conv1dLayer> layers_;
  AffineLayer classifier_;
};

struct GradCheckReport {
  double max_relative_error = 0.0;  // max over tensors
  std::vector<double> tensor_errors;  // parameters in order, then the input
  int64_t coordinates_checked = 0;
};

/// Compares analytic gradients against central differences of `loss`.
///
/// For each tensor the error is ||analytic - numeric|| / max(||analytic||,
/// ||numeric||) over the checked coordinates (zero when both vanish).
/// Tensors larger than `max_coords_per_tensor` (0 = no limit) are checked on
/// a seeded random subset of coordinates.
GradCheckReport CompareGradients(const std::vector<Matrix *> &tensors,
                                 const std::vector<Matrix> &analytic,
                                 const std::function<double()> &loss, double eps,
                                 int64_t max_coords_per_tensor = 0,
                                 uint64_t seed = 0);

/// Runs CompareGradients over every network parameter and the input.
/// `corrupt` may alter the analytic gradients before comparison (fault
/// injection for testing the checker).
GradCheckReport GradCheckNetwork(
    const Network &net, const Matrix &x, const AlignmentMatrix &align,
    int64_t label, double eps = 1e-5, int64_t max_coords_per_tensor = 0,
    const std::function<void(Gradients *, Matrix *)> &corrupt = {});

}  // namespace dsv

#endif  // DSV_NNET_NETWORK_H_
