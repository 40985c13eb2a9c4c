// dsv/model-io.h

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

#ifndef DSV_MODEL_IO_H_
#define DSV_MODEL_IO_H_

#include <map>
#include <string>
#include <vector>

#include "dsv/evaluation.h"
#include "dsv/feature-matrix.h"
#include "dsv/hmm.h"
#include "dsv/nnet-network.h"

namespace dsv {

// Models are JSON documents. Doubles are written in shortest round-trip
// form, so save -> load -> save reproduces the same bytes.

constexpr int kHmmFormatVersion = 1;
constexpr int kBundleFormatVersion = 1;

std::string HmmToString(const LeftRightHmm &hmm, const std::string &phrase_id);
LeftRightHmm HmmFromString(const std::string &text, std::string *phrase_id = nullptr);
void WriteHmm(const std::string &path, const LeftRightHmm &hmm,
              const std::string &phrase_id);
LeftRightHmm ReadHmm(const std::string &path, std::string *phrase_id = nullptr);

/// Everything extraction needs: the network, the per-phrase HMMs used for
/// alignment, the training class map and the feature settings it was
/// trained under.
struct ModelBundle {
  Network network;
  std::string fingerprint;
  LengthNormMode length_norm = LengthNormMode::kLinearInterp;
  bool cmvn = false;
  bool hmm_static_only = false;
  std::vector<ModelId> class_map;  // class index -> (speaker, phrase)
  std::map<std::string, LeftRightHmm> hmms;

  Architecture architecture() const { return network.config().architecture; }

  /// Throws Error(kFingerprintMismatch) if `fingerprint` differs.
  void CheckFingerprint(const std::string &expected) const;
};

std::string BundleToString(const ModelBundle &bundle);
/// Throws Error(kVersionMismatch) for an unknown format or version and
/// Error(kFormat) for inconsistent shapes.
ModelBundle BundleFromString(const std::string &text);
void WriteBundle(const std::string &path, const ModelBundle &bundle);
ModelBundle ReadBundle(const std::string &path);

}  // namespace dsv

#endif  // DSV_MODEL_IO_H_
