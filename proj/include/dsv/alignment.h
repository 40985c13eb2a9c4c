// dsv/alignment.h

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

#ifndef DSV_ALIGNMENT_H_
#define DSV_ALIGNMENT_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dsv/feature-matrix.h"
#include "dsv/hmm.h"

namespace dsv {

/**
   Hard frame-to-state alignment, the T x Q one-hot matrix A with
   a(t, state[t]) = 1. It is stored sparsely as the per-frame state index plus
   the per-state occupancy N_q = sum_t a(t, q); the dense matrix is only built
   on request.

   Every row has exactly one active state and every state at least one frame.
   The alignment is a constant of the pooling layer: no gradient flows into it.
*/
class AlignmentMatrix {
 public:
  AlignmentMatrix() = default;

  int64_t NumFrames() const { return static_cast<int64_t>(state_of_frame_.size()); }
  int32_t NumStates() const { return static_cast<int32_t>(occupancy_.size()); }
  const std::vector<int32_t> &state_of_frame() const { return state_of_frame_; }
  const std::vector<int64_t> &occupancy() const { return occupancy_; }

  /// T x Q matrix of zeros and ones.
  Matrix Dense() const;

  /// Every frame in one state: pooling with it is the temporal mean.
  static AlignmentMatrix SingleState(int64_t num_frames);

 private:
  friend AlignmentMatrix ExpandAlignment(const StateSequence &, int32_t);
  std::vector<int32_t> state_of_frame_;
  std::vector<int64_t> occupancy_;
};

/// Builds the alignment from a decoded sequence. The sequence must be
/// left-to-right and visit every state in 0..num_states-1.
AlignmentMatrix ExpandAlignment(const StateSequence &states, int32_t num_states);

/// C x Q per-state means. `flat` order is state-major:
/// [s(:,0); s(:,1); ...; s(:,Q-1)].
struct Supervector {
  Matrix per_state;

  int64_t Channels() const { return per_state.rows(); }
  int32_t States() const { return static_cast<int32_t>(per_state.cols()); }
  Vector Flatten() const;
  static Supervector Unflatten(const Vector &flat, int64_t channels);
};

/// s(c, q) = sum_t x(c, t) a(t, q) / sum_t a(t, q).
Supervector PoolSupervector(const Matrix &x, const AlignmentMatrix &align);

/// Per-channel temporal mean: pooling with the single-state alignment.
Vector MeanPool(const Matrix &x);

/// grad_x(c, t) = grad_s(c, state[t]) / N_{state[t]}.
Matrix PoolBackward(const Matrix &grad_s, const AlignmentMatrix &align);

// Supervector record: "SVC1", u32 C, u32 Q, then C*Q float32 in flat order.
void WriteSupervector(std::ostream &os, const Vector &flat, int64_t channels);
Vector ReadSupervector(std::istream &is, int64_t *channels = nullptr);

/// Concatenated supervector records plus an "<archive>.idx" text index of
/// "utterance_id<TAB>byte_offset" lines, in insertion order.
class SupervectorArchive {
 public:
  void Add(const std::string &utterance_id, Vector flat, int64_t channels);
  const Vector &Get(const std::string &utterance_id) const;
  bool Contains(const std::string &utterance_id) const;
  const std::vector<std::string> &ids() const { return ids_; }
  int64_t channels(const std::string &utterance_id) const;

  void Write(const std::string &path) const;
  static SupervectorArchive Read(const std::string &path);

 private:
  std::vector<std::string> ids_;
  std::map<std::string, std::pair<Vector, int64_t>> vectors_;
};

}  // namespace dsv

#endif  // DSV_ALIGNMENT_H_
