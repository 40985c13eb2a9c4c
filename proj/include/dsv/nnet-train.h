// dsv/nnet-train.h

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

#ifndef DSV_NNET_TRAIN_H_
#define DSV_NNET_TRAIN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsv/nnet-network.h"

namespace dsv {

enum class OptimizerType { kAdam, kSgd };

OptimizerType ParseOptimizer(std::string_view s);
std::string_view OptimizerName(OptimizerType t);

struct TrainConfig {
  uint64_t seed = 1;
  int epochs = 30;
  int batch_size = 16;
  double lr = 1e-3;
  OptimizerType optimizer = OptimizerType::kAdam;
  double momentum = 0.9;  // SGD only
  Architecture architecture = Architecture::kFE3C_k3_align;
  int64_t width = 128;
  double erase_prob = 0.5;
  double erase_area_min = 0.02;
  double erase_area_max = 0.2;
  bool deterministic = true;
  int jobs = 1;

  void Validate() const;
};

/// Adam (default moments) or SGD with momentum over a fixed tensor list.
class Optimizer {
 public:
  Optimizer(OptimizerType type, double lr, double momentum,
            const std::vector<Matrix *> &params);
  void Step(const std::vector<Matrix *> &params, const Gradients &grads);

 private:
  OptimizerType type_;
  double lr_;
  double momentum_;
  int64_t step_ = 0;
  std::vector<Matrix> m_, v_;
};

/// With probability p, overwrites one channel x frame rectangle whose area
/// fraction is drawn from [area_min, area_max]. The fill is `fill` when
/// given, otherwise the matrix mean. If no integer rectangle fits the area
/// range (tiny inputs) the input is returned unchanged.
Matrix RandomErasing(const Matrix &x, double p, double area_min, double area_max,
                     Rng *rng, std::optional<double> fill = std::nullopt);

struct TrainingExample {
  const Matrix *features;  // length-normalized input, C x T
  AlignmentMatrix alignment;
  int64_t label;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double wall_seconds = 0.0;
};

/// Mini-batch training of `net` on the joint-class cross-entropy. Batch
/// order, erasing and initialization are drawn from `config.seed`; per-example
/// gradients are summed in example order, so results do not depend on
/// `config.jobs`. Throws Error(kNumerical) on a non-finite loss.
std::vector<EpochStats> TrainNetwork(
    Network *net, std::span<const TrainingExample> examples,
    const TrainConfig &config,
    const std::function<void(const EpochStats &)> &on_epoch = {});

/// Mean loss over `examples` without augmentation or updates.
double EvaluateLoss(const Network &net, std::span<const TrainingExample> examples);

}  // namespace dsv

#endif  // DSV_NNET_TRAIN_H_
