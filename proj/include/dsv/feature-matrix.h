// dsv/feature-matrix.h

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

#ifndef DSV_FEATURE_MATRIX_H_
#define DSV_FEATURE_MATRIX_H_

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace dsv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A C x T matrix of per-frame features: rows are channels, columns frames.
struct FeatureMatrix {
  Matrix data;
  double frame_shift_ms = 10.0;

  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix d, double shift_ms = 10.0)
      : data(std::move(d)), frame_shift_ms(shift_ms) {}

  int64_t ChannelCount() const { return data.rows(); }
  int64_t FrameCount() const { return data.cols(); }
  bool AllFinite() const { return data.allFinite(); }
};

enum class LengthNormMode { kZeroPad, kLinearInterp };

LengthNormMode ParseLengthNormMode(std::string_view s);
std::string_view LengthNormModeName(LengthNormMode mode);

/// Resamples or pads `f` to exactly `target_frames` frames.
///
/// kZeroPad appends all-zero frames, or truncates when the input is longer.
/// kLinearInterp resamples each channel on a uniform grid that maps the
/// first and last input frames onto the first and last output frames.
FeatureMatrix NormalizeLength(const FeatureMatrix &f, int64_t target_frames,
                              LengthNormMode mode);

/// Per-channel mean and variance normalization over the utterance.
/// Off by default in the pipelines; exposed through the `cmvn` config flag.
FeatureMatrix MeanVarianceNormalize(const FeatureMatrix &f);

// Feature file: "FTM1", u32 C, u32 T, u32 reserved (0), then C*T float32,
// channel-major, all little-endian. Values are stored at float precision.
void WriteFeatures(std::ostream &os, const FeatureMatrix &f);
FeatureMatrix ReadFeatures(std::istream &is);
void WriteFeatures(const std::string &path, const FeatureMatrix &f);
FeatureMatrix ReadFeatures(const std::string &path);

}  // namespace dsv

#endif  // DSV_FEATURE_MATRIX_H_
