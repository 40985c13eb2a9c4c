// dsv/config.h

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

#ifndef DSV_CONFIG_H_
#define DSV_CONFIG_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "dsv/corpus.h"
#include "dsv/evaluation.h"
#include "dsv/feature-mfcc.h"
#include "dsv/hmm.h"
#include "dsv/nnet-train.h"

namespace dsv {

/**
   Experiment configuration, read from an INI file:

     [general]    seed, jobs
     [paths]      corpus, output
     [corpus]     source (synthetic | rsr2015), generator sizes, rsr_* keys
     [features]   MFCC settings, delta_width, length_norm, cmvn
     [hmm]        states, iters, tol, var_floor_factor, static_only
     [network]    TrainConfig keys, or train_config = <key=value file>
     [evaluation] trials, enroll_rule, pca

   Relative paths are resolved against the config file's directory. The
   OUTPUT_DIR environment variable, when set, replaces paths.output.
   Unknown sections or keys are rejected.
*/
struct ExperimentConfig {
  std::string corpus_dir = "corpus";
  std::string output_dir = "out";
  std::optional<uint64_t> seed;
  int jobs = 1;
  int verbose = 0;

  std::string source = "synthetic";
  SynthSpec synth;
  std::string rsr_root;
  std::string rsr_train_speakers;  // file with one speaker id per line
  std::set<int> rsr_enroll_sessions = {1, 4, 7};
  std::set<int> rsr_phrases;       // empty = all

  MfccConfig mfcc;
  int delta_width = 2;
  LengthNormMode length_norm = LengthNormMode::kLinearInterp;
  bool cmvn = false;

  HmmTrainOptions hmm;
  bool hmm_static_only = false;

  TrainConfig train;

  std::string trials_path;  // empty = generate from the manifest
  EnrollRule enroll_rule = EnrollRule::kMean;
  bool pca = true;

  static ExperimentConfig FromFile(const std::string &path);
  /// Parses INI text; relative paths resolve against `base_dir`.
  static ExperimentConfig FromString(const std::string &text,
                                     const std::string &base_dir);

  /// Seed for stochastic steps. Throws Error(kInvalidConfig) when
  /// determinism is requested but no seed was configured.
  uint64_t Seed() const;

  /// Hash of the feature front-end settings that the network depends on.
  std::string FeatureFingerprint(const std::string &corpus_fingerprint) const;

  std::string CorpusManifestPath() const;
};

/// Reads "key = value" lines into `config`; keys as in the [network] section.
void ReadTrainConfigFile(const std::string &path, TrainConfig *config);

}  // namespace dsv

#endif  // DSV_CONFIG_H_
