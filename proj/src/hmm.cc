// hmm.cc

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

#include "dsv/hmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dsv/error.h"

namespace dsv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Absolute lower bound on the variance floor, for constant channels.
constexpr double kMinVarFloor = 1e-8;

double ClampProb(double p) {
  return std::clamp(p, LeftRightHmm::kMinTransitionProb,
                    1.0 - LeftRightHmm::kMinTransitionProb);
}

}  // namespace

void StateSequence::Validate(int32_t num_states) const {
  if (states.empty()) DSV_ERR(kInvalidArgument) << "empty state sequence";
  if (states.front() != 0)
    DSV_ERR(kInvalidArgument) << "state sequence does not start in the first state";
  if (states.back() != num_states - 1)
    DSV_ERR(kEmptyState) << "state sequence ends in state " << states.back() + 1
                         << ", expected " << num_states;
  for (size_t t = 1; t < states.size(); ++t) {
    const int32_t step = states[t] - states[t - 1];
    if (step != 0 && step != 1)
      DSV_ERR(kInvalidArgument) << "illegal step " << states[t - 1] + 1 << " -> "
                                << states[t] + 1 << " at frame " << t;
  }
}

LeftRightHmm::LeftRightHmm(Matrix means, Matrix variances, Vector var_floor,
                           Vector self_loop_prob)
    : means_(std::move(means)),
      variances_(std::move(variances)),
      var_floor_(std::move(var_floor)) {
  const int32_t q_count = NumStates();
  if (q_count < 1) DSV_ERR(kInvalidArgument) << "HMM needs at least one state";
  if (variances_.rows() != means_.rows() || variances_.cols() != means_.cols() ||
      var_floor_.size() != means_.rows() || self_loop_prob.size() != q_count)
    DSV_ERR(kDimensionMismatch) << "inconsistent HMM parameter shapes";
  if ((var_floor_.array() <= 0.0).any())
    DSV_ERR(kInvalidArgument) << "variance floor must be positive";
  log_self_.resize(q_count);
  log_adv_.resize(q_count);
  gconst_.resize(q_count);
  inv_var_.resize(Dim(), q_count);
  for (int32_t q = 0; q < q_count; ++q) {
    SetSelfLoopProb(q, self_loop_prob[q]);
    variances_.col(q) = variances_.col(q).cwiseMax(var_floor_);
    Refresh(q);
  }
}

void LeftRightHmm::SetState(int32_t q, const Vector &mean, const Vector &var) {
  DSV_CHECK(q >= 0 && q < NumStates(), kInvalidArgument);
  if (mean.size() != Dim() || var.size() != Dim())
    DSV_ERR(kDimensionMismatch) << "state parameter dimension";
  means_.col(q) = mean;
  variances_.col(q) = var.cwiseMax(var_floor_);
  Refresh(q);
}

void LeftRightHmm::SetSelfLoopProb(int32_t q, double p) {
  DSV_CHECK(q >= 0 && q < NumStates(), kInvalidArgument);
  p = ClampProb(p);
  log_self_[q] = std::log(p);
  log_adv_[q] = std::log1p(-p);
}

void LeftRightHmm::SetLogTransitions(int32_t q, double log_self, double log_adv) {
  DSV_CHECK(q >= 0 && q < NumStates(), kInvalidArgument);
  if (!(log_self <= 0.0 && log_adv <= 0.0) ||
      std::abs(std::exp(log_self) + std::exp(log_adv) - 1.0) > 1e-9)
    DSV_ERR(kInvalidArgument) << "state " << q << ": transition probabilities "
                              << std::exp(log_self) << " + " << std::exp(log_adv)
                              << " do not sum to one";
  log_self_[q] = log_self;
  log_adv_[q] = log_adv;
}

void LeftRightHmm::Refresh(int32_t q) {
  inv_var_.col(q) = variances_.col(q).cwiseInverse();
  gconst_[q] = -0.5 * (Dim() * std::log(2.0 * std::numbers::pi) +
                       variances_.col(q).array().log().sum());
}

double LeftRightHmm::LogEmission(int32_t q,
                                 const Eigen::Ref<const Vector> &frame) const {
  if (q < 0 || q >= NumStates())
    DSV_ERR(kInvalidArgument) << "state " << q << " out of range";
  if (frame.size() != Dim())
    DSV_ERR(kDimensionMismatch) << "frame dim " << frame.size()
                                << " vs model dim " << Dim();
  const auto diff = (frame - means_.col(q)).array();
  return gconst_[q] - 0.5 * (diff.square() * inv_var_.col(q).array()).sum();
}

double LeftRightHmm::PathLogLikelihood(const FeatureMatrix &f,
                                       std::span<const int32_t> states) const {
  if (static_cast<int64_t>(states.size()) != f.FrameCount())
    DSV_ERR(kDimensionMismatch) << "path length vs frame count";
  double total = 0.0;
  for (size_t t = 0; t < states.size(); ++t) {
    total += LogEmission(states[t], f.data.col(static_cast<int64_t>(t)));
    if (t > 0) total += states[t] == states[t - 1] ? log_self_[states[t - 1]]
                                                   : log_adv_[states[t - 1]];
  }
  return total + log_adv_[states.back()];
}

LeftRightHmm InitUniformSegmentation(std::span<const FeatureMatrix> utterances,
                                     int32_t num_states,
                                     double var_floor_factor) {
  if (utterances.empty()) DSV_ERR(kInvalidArgument) << "no training utterances";
  if (num_states < 1) DSV_ERR(kInvalidArgument) << "need at least one state";
  const int64_t dim = utterances[0].ChannelCount();
  int64_t total_frames = 0;
  for (const auto &u : utterances) {
    if (u.ChannelCount() != dim)
      DSV_ERR(kDimensionMismatch) << "utterances disagree on channel count";
    if (u.FrameCount() < num_states)
      DSV_ERR(kNoValidPath) << "utterance with " << u.FrameCount()
                            << " frames is shorter than " << num_states << " states";
    total_frames += u.FrameCount();
  }

  Matrix sum = Matrix::Zero(dim, num_states);
  Vector count = Vector::Zero(num_states);
  Vector global_sum = Vector::Zero(dim);
  for (const auto &u : utterances) {
    const int64_t frames = u.FrameCount();
    for (int32_t q = 0; q < num_states; ++q) {
      const int64_t begin = q * frames / num_states;
      const int64_t end = (q + 1) * frames / num_states;
      sum.col(q) += u.data.middleCols(begin, end - begin).rowwise().sum();
      count[q] += static_cast<double>(end - begin);
    }
    global_sum += u.data.rowwise().sum();
  }
  const Vector global_mean = global_sum / static_cast<double>(total_frames);
  Matrix means = sum.array().rowwise() / count.transpose().array();

  Matrix sq = Matrix::Zero(dim, num_states);
  Vector global_sq = Vector::Zero(dim);
  for (const auto &u : utterances) {
    const int64_t frames = u.FrameCount();
    for (int32_t q = 0; q < num_states; ++q) {
      const int64_t begin = q * frames / num_states;
      const int64_t end = (q + 1) * frames / num_states;
      sq.col(q) += (u.data.middleCols(begin, end - begin).colwise() - means.col(q))
                       .array().square().matrix().rowwise().sum();
    }
    global_sq += (u.data.colwise() - global_mean).array().square().matrix()
                     .rowwise().sum();
  }
  Vector floor = (var_floor_factor * global_sq / static_cast<double>(total_frames))
                     .cwiseMax(kMinVarFloor);
  Matrix vars = sq.array().rowwise() / count.transpose().array();

  const double mean_frames =
      static_cast<double>(total_frames) / static_cast<double>(utterances.size());
  Vector self = Vector::Constant(num_states, 1.0 - num_states / mean_frames);
  return LeftRightHmm(std::move(means), std::move(vars), std::move(floor),
                      std::move(self));
}

StateSequence Viterbi(const LeftRightHmm &hmm, const FeatureMatrix &f) {
  const int32_t q_count = hmm.NumStates();
  const int64_t frames = f.FrameCount();
  if (f.ChannelCount() != hmm.Dim())
    DSV_ERR(kDimensionMismatch) << "features have " << f.ChannelCount()
                                << " channels, model expects " << hmm.Dim();
  if (frames < q_count)
    DSV_ERR(kNoValidPath) << frames << " frames cannot visit " << q_count
                          << " states";

  const Vector &log_self = hmm.log_self();
  const Vector &log_adv = hmm.log_adv();
  // Row t holds scores for frame t; state q is reachable at frame t only if
  // q <= t and there are enough frames left to reach the last state.
  Matrix score = Matrix::Constant(frames, q_count, kNegInf);
  std::vector<uint8_t> advanced(static_cast<size_t>(frames * q_count), 0);
  score(0, 0) = hmm.LogEmission(0, f.data.col(0));
  for (int64_t t = 1; t < frames; ++t) {
    const int64_t lo = std::max<int64_t>(0, q_count - (frames - t));
    const int64_t hi = std::min<int64_t>(t, q_count - 1);
    for (int64_t q = lo; q <= hi; ++q) {
      const double stay = score(t - 1, q) + log_self[q];
      const double adv = q > 0 ? score(t - 1, q - 1) + log_adv[q - 1] : kNegInf;
      double best = stay;
      if (adv > stay) {
        best = adv;
        advanced[t * q_count + q] = 1;
      }
      score(t, q) = best + hmm.LogEmission(static_cast<int32_t>(q), f.data.col(t));
    }
  }

  StateSequence path;
  path.states.resize(static_cast<size_t>(frames));
  path.log_likelihood = score(frames - 1, q_count - 1) + log_adv[q_count - 1];
  if (!std::isfinite(path.log_likelihood))
    DSV_ERR(kNumerical) << "non-finite Viterbi score";
  int32_t q = q_count - 1;
  for (int64_t t = frames - 1; t >= 0; --t) {
    path.states[t] = q;
    if (t > 0 && advanced[t * q_count + q]) --q;
  }
  return path;
}

LeftRightHmm ReestimateFromPaths(const LeftRightHmm &hmm,
                                 std::span<const FeatureMatrix> utterances,
                                 std::span<const StateSequence> paths) {
  DSV_CHECK(utterances.size() == paths.size(), kDimensionMismatch);
  const int32_t q_count = hmm.NumStates();
  const int64_t dim = hmm.Dim();
  Matrix sum = Matrix::Zero(dim, q_count);
  Vector count = Vector::Zero(q_count);
  Vector self_count = Vector::Zero(q_count);
  Vector adv_count = Vector::Zero(q_count);
  for (size_t u = 0; u < utterances.size(); ++u) {
    const auto &states = paths[u].states;
    const auto &data = utterances[u].data;
    for (size_t t = 0; t < states.size(); ++t) {
      sum.col(states[t]) += data.col(static_cast<int64_t>(t));
      count[states[t]] += 1.0;
      const bool last = t + 1 == states.size();
      if (!last && states[t + 1] == states[t])
        self_count[states[t]] += 1.0;
      else
        adv_count[states[t]] += 1.0;
    }
  }
  Matrix means = hmm.means();
  for (int32_t q = 0; q < q_count; ++q)
    if (count[q] >= 2.0) means.col(q) = sum.col(q) / count[q];
  Matrix sq = Matrix::Zero(dim, q_count);
  for (size_t u = 0; u < utterances.size(); ++u) {
    const auto &states = paths[u].states;
    const auto &data = utterances[u].data;
    for (size_t t = 0; t < states.size(); ++t)
      sq.col(states[t]) +=
          (data.col(static_cast<int64_t>(t)) - means.col(states[t])).cwiseAbs2();
  }

  LeftRightHmm out = hmm;
  for (int32_t q = 0; q < q_count; ++q) {
    if (count[q] >= 2.0) out.SetState(q, means.col(q), sq.col(q) / count[q]);
    const double n = self_count[q] + adv_count[q];
    if (n > 0.0) out.SetSelfLoopProb(q, self_count[q] / n);
  }
  return out;
}

HmmTrainResult TrainSegmental(const LeftRightHmm &init,
                              std::span<const FeatureMatrix> utterances,
                              int max_iters, double tol) {
  if (utterances.empty()) DSV_ERR(kInvalidArgument) << "no training utterances";
  HmmTrainResult result{init, {}, 0};
  std::vector<StateSequence> paths(utterances.size());
  while (true) {
    double total = 0.0;
    for (size_t u = 0; u < utterances.size(); ++u) {
      paths[u] = Viterbi(result.hmm, utterances[u]);
      total += paths[u].log_likelihood;
    }
    const bool converged = !result.log_likelihood.empty() &&
                           total - result.log_likelihood.back() < tol;
    result.log_likelihood.push_back(total);
    if (converged || result.iterations >= max_iters) break;
    result.hmm = ReestimateFromPaths(result.hmm, utterances, paths);
    ++result.iterations;
  }
  return result;
}

}  // namespace dsv
