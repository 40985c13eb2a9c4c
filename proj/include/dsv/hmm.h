// dsv/hmm.h

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

#ifndef DSV_HMM_H_
#define DSV_HMM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dsv/feature-matrix.h"

namespace dsv {

/// Decoded state path. States are 0-based in memory (0..Q-1); text files
/// written by the tools use 1-based states.
struct StateSequence {
  std::vector<int32_t> states;
  double log_likelihood = 0.0;

  int64_t size() const { return static_cast<int64_t>(states.size()); }

  /// Checks the left-to-right shape: starts at 0, ends at num_states-1,
  /// steps of 0 or 1. Throws Error(kInvalidArgument) otherwise.
  void Validate(int32_t num_states) const;
};

/// Left-to-right HMM with one diagonal Gaussian per state and self-loop /
/// advance transitions only. Entry is forced into state 0; the path must
/// leave from state Q-1 after the last frame, and that exit transition is
/// part of the path score.
class LeftRightHmm {
 public:
  // Transition probabilities are kept in [kMinTransitionProb, 1 - kMinTransitionProb].
  static constexpr double kMinTransitionProb = 1e-6;

  LeftRightHmm() = default;
  LeftRightHmm(Matrix means, Matrix variances, Vector var_floor,
               Vector self_loop_prob);

  int32_t NumStates() const { return static_cast<int32_t>(means_.cols()); }
  int32_t Dim() const { return static_cast<int32_t>(means_.rows()); }

  const Matrix &means() const { return means_; }
  const Matrix &variances() const { return variances_; }
  const Vector &var_floor() const { return var_floor_; }
  const Vector &log_self() const { return log_self_; }
  const Vector &log_adv() const { return log_adv_; }

  int64_t target_frames() const { return target_frames_; }
  void set_target_frames(int64_t n) { target_frames_ = n; }

  void SetState(int32_t q, const Vector &mean, const Vector &var);
  void SetSelfLoopProb(int32_t q, double p);
  /// Sets both log transition terms as given (used when loading a model).
  /// Throws Error(kInvalidArgument) unless they are log-probabilities that
  /// sum to one within 1e-9.
  void SetLogTransitions(int32_t q, double log_self, double log_adv);

  /// Diagonal-Gaussian log density of `frame` under state q (0-based).
  double LogEmission(int32_t q, const Eigen::Ref<const Vector> &frame) const;

  /// Score of a given path: sum of emission terms, self/advance transitions
  /// between frames, and the final exit from the last state.
  double PathLogLikelihood(const FeatureMatrix &f,
                           std::span<const int32_t> states) const;

 private:
  void Refresh(int32_t q);

  Matrix means_;      // C x Q
  Matrix variances_;  // C x Q
  Vector var_floor_;  // C
  Vector log_self_;   // Q
  Vector log_adv_;    // Q
  Vector gconst_;     // Q, -0.5 * (C log 2pi + sum log var)
  Matrix inv_var_;    // C x Q
  int64_t target_frames_ = 0;
};

struct HmmTrainOptions {
  int32_t num_states = 40;
  int max_iters = 20;
  double tol = 1e-4;
  double var_floor_factor = 1e-3;  // floor = factor * global per-channel var
};

/// Splits each utterance into Q equal contiguous chunks and fits each state's
/// Gaussian on the pooled chunks. Self-loop probability is 1 - Q / mean(T).
LeftRightHmm InitUniformSegmentation(std::span<const FeatureMatrix> utterances,
                                     int32_t num_states,
                                     double var_floor_factor = 1e-3);

/// Best left-to-right path under the forced start/end constraints.
/// Requires T >= Q. On exact ties the self-loop (lower state) wins.
StateSequence Viterbi(const LeftRightHmm &hmm, const FeatureMatrix &f);

struct HmmTrainResult {
  LeftRightHmm hmm;
  std::vector<double> log_likelihood;  // total Viterbi score per alignment pass
  int iterations = 0;                  // re-estimation steps performed
};

/// Re-estimates Gaussians and transitions from the hard Viterbi path.
/// States that receive fewer than two frames keep their previous emission.
LeftRightHmm ReestimateFromPaths(const LeftRightHmm &hmm,
                                 std::span<const FeatureMatrix> utterances,
                                 std::span<const StateSequence> paths);

/// Segmental k-means (Viterbi training). Alternates alignment and
/// re-estimation until the total log-likelihood gain is below `tol` or
/// `max_iters` re-estimations were done.
HmmTrainResult TrainSegmental(const LeftRightHmm &init,
                              std::span<const FeatureMatrix> utterances,
                              int max_iters, double tol);

}  // namespace dsv

#endif  // DSV_HMM_H_
