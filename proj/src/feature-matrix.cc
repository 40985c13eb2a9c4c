// feature-matrix.cc

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

#include "dsv/feature-matrix.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "dsv/error.h"
#include "dsv/io-util.h"

namespace dsv {

// Upper bound on C*T accepted from a file header (1 GiB of payload).
static constexpr uint64_t kMaxFeatureValues = uint64_t{1} << 28;

LengthNormMode ParseLengthNormMode(std::string_view s) {
  if (s == "zero_pad") return LengthNormMode::kZeroPad;
  if (s == "linear_interp") return LengthNormMode::kLinearInterp;
  DSV_ERR(kInvalidConfig) << "unknown length normalization mode '" << s << "'";
}

std::string_view LengthNormModeName(LengthNormMode mode) {
  return mode == LengthNormMode::kZeroPad ? "zero_pad" : "linear_interp";
}

FeatureMatrix NormalizeLength(const FeatureMatrix &f, int64_t target_frames,
                              LengthNormMode mode) {
  if (target_frames <= 0)
    DSV_ERR(kInvalidArgument) << "target frame count must be positive";
  const int64_t num_frames = f.FrameCount();
  DSV_CHECK(num_frames >= 1, kInvalidArgument);
  if (num_frames == target_frames) return f;

  Matrix out = Matrix::Zero(f.ChannelCount(), target_frames);
  if (mode == LengthNormMode::kZeroPad) {
    const int64_t n = std::min(num_frames, target_frames);
    out.leftCols(n) = f.data.leftCols(n);
  } else if (num_frames == 1 || target_frames == 1) {
    out.colwise() = f.data.col(0);
  } else {
    const double step = static_cast<double>(num_frames - 1) /
                        static_cast<double>(target_frames - 1);
    for (int64_t t = 0; t < target_frames; ++t) {
      const double pos = step * static_cast<double>(t);
      int64_t lo = static_cast<int64_t>(std::floor(pos));
      if (lo >= num_frames - 1) lo = num_frames - 2;
      const double w = pos - static_cast<double>(lo);
      if (t == target_frames - 1) {
        out.col(t) = f.data.col(num_frames - 1);
      } else {
        out.col(t) = (1.0 - w) * f.data.col(lo) + w * f.data.col(lo + 1);
      }
    }
  }
  return FeatureMatrix(std::move(out), f.frame_shift_ms);
}

FeatureMatrix MeanVarianceNormalize(const FeatureMatrix &f) {
  Matrix out = f.data;
  const double n = static_cast<double>(f.FrameCount());
  for (int64_t c = 0; c < out.rows(); ++c) {
    const double mean = out.row(c).sum() / n;
    out.row(c).array() -= mean;
    const double var = out.row(c).squaredNorm() / n;
    if (var > 0.0) out.row(c) /= std::sqrt(var);
  }
  return FeatureMatrix(std::move(out), f.frame_shift_ms);
}

void WriteFeatures(std::ostream &os, const FeatureMatrix &f) {
  if (f.ChannelCount() < 1 || f.FrameCount() < 1)
    DSV_ERR(kInvalidArgument) << "cannot write an empty feature matrix";
  if (!f.AllFinite()) DSV_ERR(kInvalidArgument) << "non-finite feature value";
  WriteMagic(os, "FTM1");
  WriteU32(os, static_cast<uint32_t>(f.ChannelCount()));
  WriteU32(os, static_cast<uint32_t>(f.FrameCount()));
  WriteU32(os, 0);
  for (int64_t c = 0; c < f.ChannelCount(); ++c)
    for (int64_t t = 0; t < f.FrameCount(); ++t)
      WriteF32(os, static_cast<float>(f.data(c, t)));
}

FeatureMatrix ReadFeatures(std::istream &is) {
  ExpectMagic(is, "FTM1");
  const uint32_t channels = ReadU32(is);
  const uint32_t frames = ReadU32(is);
  const uint32_t reserved = ReadU32(is);
  if (reserved != 0) DSV_ERR(kFormat) << "reserved header field is nonzero";
  if (channels == 0 || frames == 0)
    DSV_ERR(kFormat) << "empty dimensions " << channels << "x" << frames;
  if (uint64_t{channels} * frames > kMaxFeatureValues)
    DSV_ERR(kFormat) << "dimension overflow " << channels << "x" << frames;
  FeatureMatrix f;
  f.data.resize(channels, frames);
  for (uint32_t c = 0; c < channels; ++c)
    for (uint32_t t = 0; t < frames; ++t) f.data(c, t) = ReadF32(is);
  if (!f.AllFinite()) DSV_ERR(kFormat) << "non-finite value in payload";
  return f;
}

void WriteFeatures(const std::string &path, const FeatureMatrix &f) {
  std::ofstream os = OpenOutput(path, true);
  WriteFeatures(os, f);
}

FeatureMatrix ReadFeatures(const std::string &path) {
  std::ifstream is = OpenInput(path, true);
  try {
    return ReadFeatures(is);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace dsv
