// dsv/feature-mfcc.h

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

#ifndef DSV_FEATURE_MFCC_H_
#define DSV_FEATURE_MFCC_H_

#include <string>
#include <vector>

#include "dsv/feature-matrix.h"

namespace dsv {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

/// Reads a mono PCM WAV file (8, 16, 24 or 32 bit integer samples).
/// Samples are scaled to the 16-bit integer range, as in HTK and Kaldi.
Waveform ReadWav(const std::string &path);

struct MfccConfig {
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  double preemph_coeff = 0.97;
  int num_mel_bins = 26;
  int num_ceps = 20;
  double low_freq = 20.0;
  double high_freq = 0.0;  // <= 0 means offset from Nyquist
  double energy_floor = 1e-10;

  // Canonical text form, used for fingerprints.
  std::string ToString() const;
};

/// Computes static MFCCs (C0..C{num_ceps-1}) for every complete frame.
///
/// Pipeline: whole-signal pre-emphasis, framing, Hamming window, power
/// spectrum on the next power-of-two FFT size, triangular mel filterbank
/// (HTK mel scale), log with energy floor, orthonormal DCT-II.
FeatureMatrix ComputeMfcc(const Waveform &wave, const MfccConfig &config);

/// Appends regression deltas and delta-deltas: output is [static; d; dd],
/// 3C x T. d_t = sum_n n (c_{t+n} - c_{t-n}) / (2 sum_n n^2), n = 1..width,
/// with the first and last frames replicated beyond the edges.
FeatureMatrix AppendDeltas(const FeatureMatrix &f, int width = 2);

}  // namespace dsv

#endif  // DSV_FEATURE_MFCC_H_
