// tests/oracles.h

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

// Slow, independent reference computations used by the tests.

#ifndef DSV_TESTS_ORACLES_H_
#define DSV_TESTS_ORACLES_H_

#include <string>
#include <vector>

#include "dsv/feature-matrix.h"
#include "dsv/feature-mfcc.h"
#include "dsv/hmm.h"
#include "dsv/rng.h"

namespace dsv::oracle {

Matrix RandomMatrix(int64_t rows, int64_t cols, Rng *rng, double scale = 1.0);

/// Random left-to-right sequence of length T covering states 0..Q-1.
std::vector<int32_t> RandomStaircase(int64_t T, int32_t Q, Rng *rng);

/// Random model with well-conditioned variances and transition probabilities.
LeftRightHmm RandomHmm(int32_t Q, int64_t C, Rng *rng);

/// MFCCs from the textbook definitions: O(N^2) DFT, triangular filters
/// evaluated on the mel axis, DCT-II by explicit sums.
Matrix NaiveMfcc(const Waveform &wave, const MfccConfig &config);

/// Diagonal Gaussian log density written out term by term.
double GaussianLogDensity(const Vector &x, const Vector &mean, const Vector &var);

/// Log probability of a state path: emissions, transitions, final exit.
double PathScore(const LeftRightHmm &hmm, const Matrix &x,
                 const std::vector<int32_t> &path);

/// Best path over every legal left-to-right path (exhaustive enumeration).
struct EnumerationResult {
  double best_score;
  std::vector<int32_t> best_path;
  int64_t num_paths;
};
EnumerationResult EnumerateBestPath(const LeftRightHmm &hmm, const Matrix &x);

/// Per-state frame averages by explicit loops, C x Q.
Matrix BruteForcePool(const Matrix &x, const std::vector<int32_t> &states,
                      int32_t Q);

/// EER by sweeping thresholds below, between (midpoints) and above all
/// observed scores, counting errors from scratch at every threshold, and
/// interpolating linearly at the first sign change of frr - far.
double BruteForceEer(const std::vector<double> &target,
                     const std::vector<double> &nontarget);

}  // namespace dsv::oracle

#endif  // DSV_TESTS_ORACLES_H_
