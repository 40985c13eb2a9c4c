// dsv/evaluation.h

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

#ifndef DSV_EVALUATION_H_
#define DSV_EVALUATION_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dsv/corpus.h"
#include "dsv/feature-matrix.h"

namespace dsv {

enum class TrialLabel { kTarget, kImpostor, kWrongPhrase };

TrialLabel ParseTrialLabel(std::string_view s);
std::string_view TrialLabelName(TrialLabel l);

/// An enrollment model is identified by (speaker, phrase).
struct ModelId {
  std::string speaker_id;
  std::string phrase_id;
  auto operator<=>(const ModelId &) const = default;
};

struct TrialRecord {
  ModelId model;
  std::string test_utterance_id;
  TrialLabel label = TrialLabel::kTarget;
};

struct ScoredTrial {
  TrialRecord trial;
  double score = 0.0;
};

using ScoreSet = std::vector<ScoredTrial>;

enum class EnrollRule { kMean, kMaxScore };

EnrollRule ParseEnrollRule(std::string_view s);

/// Mean of the enrollment vectors.
Vector BuildEnrollModel(std::span<const Vector> supervectors);

/// u.v / (|u| |v|). Throws on zero vectors or length mismatch.
double Cosine(const Vector &u, const Vector &v);

/// Every (model, test utterance) pair over the eval speakers: same speaker
/// and phrase is a target, a different speaker an impostor, and the same
/// speaker with another phrase a wrong-phrase trial. Models come from the
/// enroll partition, test utterances from the test partition.
std::vector<TrialRecord> GenerateTrials(const CorpusManifest &manifest);

// Trial list: "model_speaker\tphrase\ttest_utterance\tlabel" per line.
void WriteTrials(const std::string &path, std::span<const TrialRecord> trials);
std::vector<TrialRecord> ReadTrials(const std::string &path);

// Score file: trial fields plus "\t<score>" with six decimals.
void WriteScores(const std::string &path, const ScoreSet &scores);
ScoreSet ReadScores(const std::string &path);

/// Enrollment vectors per model.
using EnrollmentSet = std::map<ModelId, std::vector<Vector>>;

/// Scores trials in input order. With kMean the model is the mean of its
/// enrollment vectors; with kMaxScore the score is the maximum cosine over
/// them. Unknown model or test ids throw Error(kUnknownId).
ScoreSet ScoreTrials(const EnrollmentSet &enrollment,
                     const std::map<std::string, Vector> &tests,
                     std::span<const TrialRecord> trials,
                     EnrollRule rule = EnrollRule::kMean);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  int64_t num_target = 0;
  int64_t num_nontarget = 0;
};

/// One point of the empirical error trade-off at acceptance threshold
/// `threshold` (accept when score >= threshold).
struct DetPoint {
  double threshold;
  double far;
  double frr;
};

/// Error rates at every distinct observed score plus +infinity, in
/// increasing threshold order. Starts at (far=1, frr=0) and ends at (0, 1).
std::vector<DetPoint> DetPoints(std::span<const double> target,
                                std::span<const double> nontarget);
std::vector<DetPoint> DetPoints(const ScoreSet &scores);

/// Equal error rate on the piecewise-linear DET curve: the first segment
/// where frr - far changes sign is interpolated linearly, and the threshold
/// interpolated along with it (the +infinity end is taken as the largest
/// score). Throws Error(kInvalidArgument) unless both classes are present.
EerResult ComputeEer(std::span<const double> target,
                     std::span<const double> nontarget);
EerResult ComputeEer(const ScoreSet &scores);

/// "eer=<fraction> threshold=<value> n_target=<n> n_nontarget=<n>"
std::string FormatEerReport(const EerResult &r);

struct PcaResult {
  Vector mean;        // D
  Matrix components;  // D x dim, orthonormal columns
  Vector variances;   // dim, non-increasing
  Matrix coords;      // N x dim
};

/// Mean-centred projection onto the top principal directions. The sign of
/// each direction is fixed so its largest-magnitude loading is positive.
PcaResult Pca(std::span<const Vector> vectors, int dim = 2);
Matrix PcaProject(std::span<const Vector> vectors, int dim = 2);

struct ProjectedPoint {
  std::string utterance_id;
  std::string speaker_id;
  std::string phrase_id;
  double x = 0.0;
  double y = 0.0;
};

void WriteProjectionCsv(const std::string &path,
                        std::span<const ProjectedPoint> points);

/// Scatter plot coloured by speaker (`by_speaker`) or by phrase.
std::string ProjectionSvg(std::span<const ProjectedPoint> points, bool by_speaker);

}  // namespace dsv

#endif  // DSV_EVALUATION_H_
