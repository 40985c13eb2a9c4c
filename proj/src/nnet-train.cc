// nnet-train.cc

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

#include "dsv/nnet-train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "dsv/error.h"
#include "dsv/rng.h"

namespace dsv {

OptimizerType ParseOptimizer(std::string_view s) {
  if (s == "adam") return OptimizerType::kAdam;
  if (s == "sgd") return OptimizerType::kSgd;
  DSV_ERR(kInvalidConfig) << "unknown optimizer '" << s << "'";
}

std::string_view OptimizerName(OptimizerType t) {
  return t == OptimizerType::kAdam ? "adam" : "sgd";
}

void TrainConfig::Validate() const {
  if (epochs < 0 || batch_size < 1 || !(lr > 0.0) || width < 1 || jobs < 1)
    DSV_ERR(kInvalidConfig) << "epochs >= 0, batch_size >= 1, lr > 0, width >= 1, "
                               "jobs >= 1 required";
  if (erase_prob < 0.0 || erase_prob > 1.0)
    DSV_ERR(kInvalidConfig) << "erase_prob must lie in [0, 1]";
  if (!(erase_area_min > 0.0 && erase_area_min <= erase_area_max &&
        erase_area_max < 1.0))
    DSV_ERR(kInvalidConfig) << "erasing area range must satisfy 0 < min <= max < 1";
}

Optimizer::Optimizer(OptimizerType type, double lr, double momentum,
                     const std::vector<Matrix *> &params)
    : type_(type), lr_(lr), momentum_(momentum) {
  for (const Matrix *p : params) {
    m_.push_back(Matrix::Zero(p->rows(), p->cols()));
    if (type_ == OptimizerType::kAdam) v_.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void Optimizer::Step(const std::vector<Matrix *> &params, const Gradients &grads) {
  DSV_CHECK(params.size() == grads.size() && params.size() == m_.size(),
            kDimensionMismatch);
  ++step_;
  if (type_ == OptimizerType::kSgd) {
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i] = momentum_ * m_[i] + grads[i];
      *params[i] -= lr_ * m_[i];
    }
    return;
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grads[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grads[i].cwiseAbs2();
    params[i]->array() -=
        lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + kEps);
  }
}

Matrix RandomErasing(const Matrix &x, double p, double area_min, double area_max,
                     Rng *rng, std::optional<double> fill) {
  if (!(area_min > 0.0 && area_min <= area_max && area_max < 1.0))
    DSV_ERR(kInvalidArgument) << "empty erasing area range [" << area_min << ", "
                              << area_max << "]";
  if (p < 0.0 || p > 1.0) DSV_ERR(kInvalidArgument) << "erasing probability " << p;
  if (!rng->Bernoulli(p)) return x;
  const int64_t rows = x.rows(), cols = x.cols();
  const double total = static_cast<double>(rows * cols);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double target = rng->Uniform(area_min, area_max) * total;
    const int64_t h_lo = std::max<int64_t>(
        1, static_cast<int64_t>(std::ceil(target / static_cast<double>(cols))));
    const int64_t h_hi = std::min<int64_t>(rows, static_cast<int64_t>(target));
    if (h_lo > h_hi) continue;
    const int64_t h = rng->Int(h_lo, h_hi);
    const int64_t w = std::clamp<int64_t>(
        std::llround(target / static_cast<double>(h)), 1, cols);
    const double frac = static_cast<double>(h * w) / total;
    if (frac < area_min || frac > area_max) continue;
    const int64_t r0 = rng->Int(0, rows - h);
    const int64_t c0 = rng->Int(0, cols - w);
    Matrix out = x;
    out.block(r0, c0, h, w).setConstant(fill ? *fill : x.mean());
    return out;
  }
  return x;
}

namespace {

int64_t ArgMax(const Vector &v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<int64_t>(i);
}

}  // namespace

std::vector<EpochStats> TrainNetwork(
    Network *net, std::span<const TrainingExample> examples,
    const TrainConfig &config,
    const std::function<void(const EpochStats &)> &on_epoch) {
  config.Validate();
  if (examples.empty()) DSV_ERR(kInvalidArgument) << "no training examples";
  std::vector<Matrix *> params = net->Parameters();
  Optimizer opt(config.optimizer, config.lr, config.momentum, params);
  Rng rng(config.seed);

  double fill_sum = 0.0, fill_count = 0.0;
  for (const auto &ex : examples) {
    fill_sum += ex.features->sum();
    fill_count += static_cast<double>(ex.features->size());
  }
  const double fill = fill_sum / fill_count;

  const size_t jobs = static_cast<size_t>(config.jobs);
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochStats> log;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.Shuffle(&order);
    double loss_sum = 0.0;
    int64_t correct = 0;
    for (size_t b0 = 0; b0 < order.size(); b0 += config.batch_size) {
      const size_t n = std::min<size_t>(config.batch_size, order.size() - b0);
      // Seeds drawn up front keep augmentation independent of thread count.
      std::vector<uint64_t> seeds(n);
      for (auto &s : seeds) s = rng.NextSeed();
      std::vector<Gradients> item_grads(std::min(n, jobs > 1 ? n : size_t{1}));
      std::vector<double> item_loss(n);
      std::vector<uint8_t> item_correct(n);
      Gradients total = net->ZeroGradients();

      auto run_item = [&](size_t i, Gradients *g) {
        const TrainingExample &ex = examples[order[b0 + i]];
        Rng item_rng(seeds[i]);
        const Matrix input =
            config.erase_prob > 0.0
                ? RandomErasing(*ex.features, config.erase_prob, config.erase_area_min,
                                config.erase_area_max, &item_rng, fill)
                : *ex.features;
        for (auto &m : *g) m.setZero();
        Vector logits;
        item_loss[i] = net->ForwardBackward(input, ex.alignment, ex.label, g, nullptr,
                                            &logits);
        item_correct[i] = ArgMax(logits) == ex.label;
      };

      if (jobs <= 1 || n == 1) {
        item_grads[0] = net->ZeroGradients();
        for (size_t i = 0; i < n; ++i) {
          run_item(i, &item_grads[0]);
          for (size_t k = 0; k < total.size(); ++k) total[k] += item_grads[0][k];
        }
      } else {
        for (auto &g : item_grads) g = net->ZeroGradients();
        std::vector<std::thread> workers;
        for (size_t j = 0; j < std::min(jobs, n); ++j)
          workers.emplace_back([&, j] {
            for (size_t i = j; i < n; i += jobs) run_item(i, &item_grads[i]);
          });
        for (auto &w : workers) w.join();
        for (size_t i = 0; i < n; ++i)
          for (size_t k = 0; k < total.size(); ++k) total[k] += item_grads[i][k];
      }

      for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(item_loss[i]))
          DSV_ERR(kNumerical) << "non-finite loss at epoch " << epoch << ", example "
                              << order[b0 + i];
        loss_sum += item_loss[i];
        correct += item_correct[i];
      }
      for (auto &g : total) g /= static_cast<double>(n);
      opt.Step(params, total);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / static_cast<double>(examples.size());
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
    stats.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start).count();
    log.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return log;
}

double EvaluateLoss(const Network &net, std::span<const TrainingExample> examples) {
  if (examples.empty()) DSV_ERR(kInvalidArgument) << "no examples";
  double sum = 0.0;
  for (const auto &ex : examples)
    sum += SoftmaxCrossEntropy(net.Logits(*ex.features, ex.alignment), ex.label, nullptr);
  return sum / static_cast<double>(examples.size());
}

}  // namespace dsv
