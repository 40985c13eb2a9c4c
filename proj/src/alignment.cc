// alignment.cc

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

#include "dsv/alignment.h"

#include <fmt/format.h>

#include <istream>
#include <ostream>
#include <sstream>

#include "dsv/error.h"
#include "dsv/io-util.h"

namespace dsv {

Matrix AlignmentMatrix::Dense() const {
  Matrix a = Matrix::Zero(NumFrames(), NumStates());
  for (int64_t t = 0; t < NumFrames(); ++t) a(t, state_of_frame_[t]) = 1.0;
  return a;
}

AlignmentMatrix AlignmentMatrix::SingleState(int64_t num_frames) {
  if (num_frames < 1) DSV_ERR(kInvalidArgument) << "alignment needs frames";
  AlignmentMatrix a;
  a.state_of_frame_.assign(static_cast<size_t>(num_frames), 0);
  a.occupancy_.assign(1, num_frames);
  return a;
}

AlignmentMatrix ExpandAlignment(const StateSequence &states, int32_t num_states) {
  if (num_states < 1) DSV_ERR(kInvalidArgument) << "need at least one state";
  if (states.states.empty()) DSV_ERR(kInvalidArgument) << "empty state sequence";
  AlignmentMatrix a;
  a.occupancy_.assign(static_cast<size_t>(num_states), 0);
  int32_t prev = 0;
  for (int32_t q : states.states) {
    if (q < 0 || q >= num_states)
      DSV_ERR(kInvalidArgument) << "state " << q + 1 << " outside 1.." << num_states;
    if (q < prev)
      DSV_ERR(kInvalidArgument) << "state sequence is not monotone";
    prev = q;
    ++a.occupancy_[q];
  }
  for (int32_t q = 0; q < num_states; ++q)
    if (a.occupancy_[q] == 0) DSV_ERR(kEmptyState) << "state " << q + 1 << " unvisited";
  a.state_of_frame_ = states.states;
  return a;
}

Vector Supervector::Flatten() const {
  return Eigen::Map<const Vector>(per_state.data(), per_state.size());
}

Supervector Supervector::Unflatten(const Vector &flat, int64_t channels) {
  if (channels < 1 || flat.size() % channels != 0)
    DSV_ERR(kDimensionMismatch) << "flat length " << flat.size()
                                << " not divisible by " << channels;
  return {Eigen::Map<const Matrix>(flat.data(), channels, flat.size() / channels)};
}

Supervector PoolSupervector(const Matrix &x, const AlignmentMatrix &align) {
  if (x.cols() != align.NumFrames())
    DSV_ERR(kDimensionMismatch) << "input has " << x.cols()
                                << " frames, alignment " << align.NumFrames();
  const auto &states = align.state_of_frame();
  const auto &occ = align.occupancy();
  Supervector s{Matrix::Zero(x.rows(), align.NumStates())};
  for (int64_t t = 0; t < x.cols(); ++t) s.per_state.col(states[t]) += x.col(t);
  for (int32_t q = 0; q < align.NumStates(); ++q) {
    if (occ[q] == 0) DSV_ERR(kEmptyState) << "state " << q + 1 << " is empty";
    s.per_state.col(q) /= static_cast<double>(occ[q]);
  }
  return s;
}

Vector MeanPool(const Matrix &x) {
  return PoolSupervector(x, AlignmentMatrix::SingleState(x.cols())).per_state.col(0);
}

Matrix PoolBackward(const Matrix &grad_s, const AlignmentMatrix &align) {
  if (grad_s.cols() != align.NumStates())
    DSV_ERR(kDimensionMismatch) << "gradient has " << grad_s.cols()
                                << " states, alignment " << align.NumStates();
  const auto &states = align.state_of_frame();
  const auto &occ = align.occupancy();
  Matrix grad_x(grad_s.rows(), align.NumFrames());
  for (int64_t t = 0; t < align.NumFrames(); ++t)
    grad_x.col(t) = grad_s.col(states[t]) / static_cast<double>(occ[states[t]]);
  return grad_x;
}

void WriteSupervector(std::ostream &os, const Vector &flat, int64_t channels) {
  if (channels < 1 || flat.size() == 0 || flat.size() % channels != 0)
    DSV_ERR(kDimensionMismatch) << "supervector length " << flat.size()
                                << " with " << channels << " channels";
  WriteMagic(os, "SVC1");
  WriteU32(os, static_cast<uint32_t>(channels));
  WriteU32(os, static_cast<uint32_t>(flat.size() / channels));
  for (int64_t i = 0; i < flat.size(); ++i) WriteF32(os, static_cast<float>(flat[i]));
}

Vector ReadSupervector(std::istream &is, int64_t *channels) {
  ExpectMagic(is, "SVC1");
  const uint32_t c = ReadU32(is);
  const uint32_t q = ReadU32(is);
  if (c == 0 || q == 0 || uint64_t{c} * q > (uint64_t{1} << 28))
    DSV_ERR(kFormat) << "bad supervector dimensions " << c << "x" << q;
  Vector flat(static_cast<int64_t>(c) * q);
  for (int64_t i = 0; i < flat.size(); ++i) flat[i] = ReadF32(is);
  if (channels) *channels = c;
  return flat;
}

void SupervectorArchive::Add(const std::string &utterance_id, Vector flat,
                             int64_t channels) {
  if (vectors_.count(utterance_id))
    DSV_ERR(kInvalidArgument) << "duplicate utterance " << utterance_id;
  // Stored at file precision, so an archive read back compares equal.
  flat = flat.cast<float>().cast<double>();
  ids_.push_back(utterance_id);
  vectors_.emplace(utterance_id, std::make_pair(std::move(flat), channels));
}

const Vector &SupervectorArchive::Get(const std::string &utterance_id) const {
  auto it = vectors_.find(utterance_id);
  if (it == vectors_.end()) DSV_ERR(kUnknownId) << "no supervector for " << utterance_id;
  return it->second.first;
}

bool SupervectorArchive::Contains(const std::string &utterance_id) const {
  return vectors_.count(utterance_id) != 0;
}

int64_t SupervectorArchive::channels(const std::string &utterance_id) const {
  auto it = vectors_.find(utterance_id);
  if (it == vectors_.end()) DSV_ERR(kUnknownId) << "no supervector for " << utterance_id;
  return it->second.second;
}

void SupervectorArchive::Write(const std::string &path) const {
  std::ostringstream data;
  std::string index;
  for (const auto &id : ids_) {
    index += fmt::format("{}\t{}\n", id, static_cast<int64_t>(data.tellp()));
    const auto &[flat, channels] = vectors_.at(id);
    WriteSupervector(data, flat, channels);
  }
  WriteStringToFile(path, data.str());
  WriteStringToFile(path + ".idx", index);
}

SupervectorArchive SupervectorArchive::Read(const std::string &path) {
  const std::string data = ReadFileToString(path);
  std::ifstream idx = OpenInput(path + ".idx");
  SupervectorArchive archive;
  std::string line;
  while (std::getline(idx, line)) {
    if (Trim(line).empty()) continue;
    auto fields = SplitString(line, '\t');
    if (fields.size() != 2) DSV_ERR(kFormat) << path << ".idx: malformed line";
    size_t offset = 0;
    try {
      offset = std::stoull(fields[1]);
    } catch (const std::exception &) {
      DSV_ERR(kFormat) << path << ".idx: bad offset '" << fields[1] << "'";
    }
    if (offset >= data.size()) DSV_ERR(kFormat) << path << ": offset past end";
    std::istringstream is(data.substr(offset));
    int64_t channels = 0;
    Vector flat = ReadSupervector(is, &channels);
    archive.Add(fields[0], std::move(flat), channels);
  }
  return archive;
}

}  // namespace dsv
