// dsv/pipeline.h

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

#ifndef DSV_PIPELINE_H_
#define DSV_PIPELINE_H_

#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dsv/config.h"
#include "dsv/corpus.h"
#include "dsv/evaluation.h"
#include "dsv/hmm.h"
#include "dsv/model-io.h"

namespace dsv {

/// Runs fn(i) for i in [0, n) on `jobs` threads (i assigned round-robin).
/// The first exception, by index, is rethrown after all workers finish.
void ParallelFor(int64_t n, int jobs, const std::function<void(int64_t)> &fn);

// Output layout under ExperimentConfig::output_dir.
std::string HmmPath(const ExperimentConfig &c, const std::string &phrase_id);
std::string AlignmentsPath(const ExperimentConfig &c);
std::string BundlePath(const ExperimentConfig &c, Architecture arch);
std::string TrainLogPath(const ExperimentConfig &c, Architecture arch);
std::string ArchivePath(const ExperimentConfig &c, Architecture arch, Partition p);
std::string TrialsPath(const ExperimentConfig &c);
std::string ScoresPath(const ExperimentConfig &c, Architecture arch);
std::string EvalDir(const ExperimentConfig &c, Architecture arch);

/// Manifest plus features, with CMVN applied when configured.
struct LoadedCorpus {
  CorpusManifest manifest;
  std::vector<FeatureMatrix> features;  // parallel to manifest.entries()
  std::string description;              // how the features were produced
};

LoadedCorpus LoadCorpus(const ExperimentConfig &c);

/// Length-normalizes `f` to the phrase model's target length.
FeatureMatrix PrepareInput(const FeatureMatrix &f, const LeftRightHmm &hmm,
                           LengthNormMode mode);
/// The rows the HMM sees: everything, or the leading third (static
/// coefficients of a [static; delta; delta-delta] layout).
FeatureMatrix HmmView(const FeatureMatrix &f, bool static_only);

/// Viterbi alignment of a prepared input.
StateSequence AlignUtterance(const FeatureMatrix &prepared, const LeftRightHmm &hmm,
                             bool static_only);

/// Embedding of one utterance under a bundle: length normalization,
/// alignment with the phrase HMM, front-end and pooling.
Vector ExtractEmbedding(const ModelBundle &bundle, const FeatureMatrix &f,
                        const std::string &phrase_id);

// Subcommands. Each reads its inputs from the corpus / output directories and
// writes its artifacts there; messages go to `log`.
void CmdSynth(const ExperimentConfig &c, std::ostream &log);
void CmdTrainHmm(const ExperimentConfig &c, std::ostream &log);
void CmdAlign(const ExperimentConfig &c, std::ostream &log);
void CmdTrainDnn(const ExperimentConfig &c, std::ostream &log);
void CmdExtract(const ExperimentConfig &c, std::ostream &log);
void CmdScore(const ExperimentConfig &c, std::ostream &log);
/// Evaluates `scores_path` (default: the architecture's score file) and
/// prints the EER report line to `out`.
EerResult CmdEval(const ExperimentConfig &c, std::ostream &out, std::ostream &log,
                  const std::string &scores_path = "");
/// Finite-difference check of every architecture on a seeded tiny instance.
/// Returns the largest relative error found.
double CmdGradcheck(const ExperimentConfig &c, std::ostream &out);

}  // namespace dsv

#endif  // DSV_PIPELINE_H_
