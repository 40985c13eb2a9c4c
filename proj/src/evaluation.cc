// evaluation.cc

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

#include "dsv/evaluation.h"

#include <fmt/format.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dsv/error.h"
#include "dsv/io-util.h"

namespace dsv {

TrialLabel ParseTrialLabel(std::string_view s) {
  if (s == "target") return TrialLabel::kTarget;
  if (s == "nontarget_impostor") return TrialLabel::kImpostor;
  if (s == "nontarget_wrong_phrase") return TrialLabel::kWrongPhrase;
  DSV_ERR(kFormat) << "unknown trial label '" << s << "'";
}

std::string_view TrialLabelName(TrialLabel l) {
  switch (l) {
    case TrialLabel::kTarget: return "target";
    case TrialLabel::kImpostor: return "nontarget_impostor";
    case TrialLabel::kWrongPhrase: return "nontarget_wrong_phrase";
  }
  return "target";
}

EnrollRule ParseEnrollRule(std::string_view s) {
  if (s == "mean") return EnrollRule::kMean;
  if (s == "max") return EnrollRule::kMaxScore;
  DSV_ERR(kInvalidConfig) << "unknown enrollment rule '" << s << "'";
}

Vector BuildEnrollModel(std::span<const Vector> supervectors) {
  if (supervectors.empty()) DSV_ERR(kInvalidArgument) << "no enrollment vectors";
  Vector sum = Vector::Zero(supervectors[0].size());
  for (const auto &v : supervectors) {
    if (v.size() != sum.size())
      DSV_ERR(kDimensionMismatch) << "enrollment vectors differ in length";
    sum += v;
  }
  return sum / static_cast<double>(supervectors.size());
}

double Cosine(const Vector &u, const Vector &v) {
  if (u.size() != v.size())
    DSV_ERR(kDimensionMismatch) << "cosine of vectors of length " << u.size()
                                << " and " << v.size();
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) DSV_ERR(kInvalidArgument) << "cosine of a zero vector";
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

std::vector<TrialRecord> GenerateTrials(const CorpusManifest &manifest) {
  std::set<ModelId> models;
  for (const auto *e : manifest.Select(Partition::kEnroll))
    models.insert({e->speaker_id, e->phrase_id});
  const auto tests = manifest.Select(Partition::kTest);
  std::vector<TrialRecord> trials;
  trials.reserve(models.size() * tests.size());
  for (const auto &m : models) {
    for (const auto *t : tests) {
      TrialLabel label = TrialLabel::kImpostor;
      if (t->speaker_id == m.speaker_id)
        label = t->phrase_id == m.phrase_id ? TrialLabel::kTarget
                                            : TrialLabel::kWrongPhrase;
      trials.push_back({m, t->utterance_id, label});
    }
  }
  return trials;
}

namespace {

std::vector<std::vector<std::string>> ReadTabLines(const std::string &path,
                                                   size_t fields) {
  std::ifstream is = OpenInput(path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    auto f = SplitString(line, '\t');
    if (f.size() != fields)
      DSV_ERR(kFormat) << path << ":" << line_no << ": expected " << fields
                       << " tab-separated fields";
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

void WriteTrials(const std::string &path, std::span<const TrialRecord> trials) {
  std::string out;
  for (const auto &t : trials)
    out += fmt::format("{}\t{}\t{}\t{}\n", t.model.speaker_id, t.model.phrase_id,
                       t.test_utterance_id, TrialLabelName(t.label));
  WriteStringToFile(path, out);
}

std::vector<TrialRecord> ReadTrials(const std::string &path) {
  std::vector<TrialRecord> trials;
  for (auto &f : ReadTabLines(path, 4))
    trials.push_back({{f[0], f[1]}, f[2], ParseTrialLabel(f[3])});
  return trials;
}

void WriteScores(const std::string &path, const ScoreSet &scores) {
  std::string out;
  for (const auto &s : scores)
    out += fmt::format("{}\t{}\t{}\t{}\t{:.6f}\n", s.trial.model.speaker_id,
                       s.trial.model.phrase_id, s.trial.test_utterance_id,
                       TrialLabelName(s.trial.label), s.score);
  WriteStringToFile(path, out);
}

ScoreSet ReadScores(const std::string &path) {
  ScoreSet scores;
  for (auto &f : ReadTabLines(path, 5)) {
    double score = 0.0;
    try {
      size_t used = 0;
      score = std::stod(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument(f[4]);
    } catch (const std::exception &) {
      DSV_ERR(kFormat) << path << ": bad score '" << f[4] << "'";
    }
    if (!std::isfinite(score)) DSV_ERR(kFormat) << path << ": non-finite score";
    scores.push_back({{{f[0], f[1]}, f[2], ParseTrialLabel(f[3])}, score});
  }
  return scores;
}

ScoreSet ScoreTrials(const EnrollmentSet &enrollment,
                     const std::map<std::string, Vector> &tests,
                     std::span<const TrialRecord> trials, EnrollRule rule) {
  std::map<ModelId, Vector> models;
  if (rule == EnrollRule::kMean)
    for (const auto &[id, vecs] : enrollment) models.emplace(id, BuildEnrollModel(vecs));
  ScoreSet out;
  out.reserve(trials.size());
  for (const auto &t : trials) {
    auto test = tests.find(t.test_utterance_id);
    if (test == tests.end())
      DSV_ERR(kUnknownId) << "test utterance " << t.test_utterance_id;
    auto enr = enrollment.find(t.model);
    if (enr == enrollment.end())
      DSV_ERR(kUnknownId) << "model " << t.model.speaker_id << "/" << t.model.phrase_id;
    double score;
    if (rule == EnrollRule::kMean) {
      score = Cosine(models.at(t.model), test->second);
    } else {
      score = -std::numeric_limits<double>::infinity();
      for (const auto &v : enr->second) score = std::max(score, Cosine(v, test->second));
    }
    out.push_back({t, score});
  }
  return out;
}

namespace {

void SplitByLabel(const ScoreSet &scores, std::vector<double> *target,
                  std::vector<double> *nontarget) {
  for (const auto &s : scores)
    (s.trial.label == TrialLabel::kTarget ? target : nontarget)->push_back(s.score);
}

}  // namespace

std::vector<DetPoint> DetPoints(std::span<const double> target,
                                std::span<const double> nontarget) {
  if (target.empty() || nontarget.empty())
    DSV_ERR(kInvalidArgument) << "need both target and nontarget scores";
  std::vector<double> tar(target.begin(), target.end());
  std::vector<double> non(nontarget.begin(), nontarget.end());
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  std::vector<double> thresholds(tar);
  thresholds.insert(thresholds.end(), non.begin(), non.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double nt = static_cast<double>(tar.size());
  const double nn = static_cast<double>(non.size());
  std::vector<DetPoint> points;
  points.reserve(thresholds.size() + 1);
  size_t tar_below = 0, non_below = 0;
  for (double th : thresholds) {
    while (tar_below < tar.size() && tar[tar_below] < th) ++tar_below;
    while (non_below < non.size() && non[non_below] < th) ++non_below;
    points.push_back({th, static_cast<double>(non.size() - non_below) / nn,
                      static_cast<double>(tar_below) / nt});
  }
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return points;
}

std::vector<DetPoint> DetPoints(const ScoreSet &scores) {
  std::vector<double> tar, non;
  SplitByLabel(scores, &tar, &non);
  return DetPoints(tar, non);
}

EerResult ComputeEer(std::span<const double> target,
                     std::span<const double> nontarget) {
  const std::vector<DetPoint> points = DetPoints(target, nontarget);
  EerResult r;
  r.num_target = static_cast<int64_t>(target.size());
  r.num_nontarget = static_cast<int64_t>(nontarget.size());
  const double max_score = points[points.size() - 2].threshold;
  auto finite_threshold = [&](const DetPoint &p) {
    return std::isinf(p.threshold) ? max_score : p.threshold;
  };
  // points.front() has frr - far = -1 and points.back() +1.
  for (size_t i = 1; i < points.size(); ++i) {
    const double d = points[i].frr - points[i].far;
    if (d < 0.0) continue;
    if (d == 0.0) {
      r.eer = points[i].far;
      r.threshold = finite_threshold(points[i]);
      return r;
    }
    const DetPoint &a = points[i - 1], &b = points[i];
    const double da = a.frr - a.far;
    const double alpha = -da / (d - da);
    r.eer = a.far + alpha * (b.far - a.far);
    r.threshold = a.threshold + alpha * (finite_threshold(b) - a.threshold);
    return r;
  }
  DSV_ERR(kNumerical) << "EER crossing not found";
}

EerResult ComputeEer(const ScoreSet &scores) {
  std::vector<double> tar, non;
  SplitByLabel(scores, &tar, &non);
  return ComputeEer(tar, non);
}

std::string FormatEerReport(const EerResult &r) {
  return fmt::format("eer={:.6f} threshold={:.6f} n_target={} n_nontarget={}", r.eer,
                     r.threshold, r.num_target, r.num_nontarget);
}

PcaResult Pca(std::span<const Vector> vectors, int dim) {
  if (vectors.size() < 2) DSV_ERR(kInvalidArgument) << "PCA needs at least two vectors";
  const int64_t d = vectors[0].size();
  if (dim < 1 || dim > d) DSV_ERR(kInvalidArgument) << "bad projection dimension " << dim;
  const int64_t n = static_cast<int64_t>(vectors.size());
  Matrix data(n, d);
  for (int64_t i = 0; i < n; ++i) {
    if (vectors[i].size() != d) DSV_ERR(kDimensionMismatch) << "PCA inputs differ in length";
    data.row(i) = vectors[i].transpose();
  }
  PcaResult r;
  r.mean = data.colwise().mean().transpose();
  data.rowwise() -= r.mean.transpose();
  Eigen::BDCSVD<Matrix> svd(data, Eigen::ComputeThinV);
  const Vector &sv = svd.singularValues();
  r.components = Matrix::Zero(d, dim);
  r.variances = Vector::Zero(dim);
  for (int k = 0; k < dim && k < sv.size(); ++k) {
    Vector c = svd.matrixV().col(k);
    Eigen::Index arg = 0;
    c.cwiseAbs().maxCoeff(&arg);
    if (c[arg] < 0.0) c = -c;
    r.components.col(k) = c;
    r.variances[k] = sv[k] * sv[k] / static_cast<double>(n);
  }
  r.coords = data * r.components;
  return r;
}

Matrix PcaProject(std::span<const Vector> vectors, int dim) {
  return Pca(vectors, dim).coords;
}

void WriteProjectionCsv(const std::string &path,
                        std::span<const ProjectedPoint> points) {
  std::string out = "utterance_id,speaker_id,phrase_id,x,y\n";
  for (const auto &p : points)
    out += fmt::format("{},{},{},{:.6f},{:.6f}\n", p.utterance_id, p.speaker_id,
                       p.phrase_id, p.x, p.y);
  WriteStringToFile(path, out);
}

std::string ProjectionSvg(std::span<const ProjectedPoint> points, bool by_speaker) {
  constexpr double kSize = 600.0, kMargin = 30.0;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!points.empty()) {
    xmin = xmax = points[0].x;
    ymin = ymax = points[0].y;
    for (const auto &p : points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  const double xr = xmax > xmin ? xmax - xmin : 1.0;
  const double yr = ymax > ymin ? ymax - ymin : 1.0;
  std::map<std::string, size_t> color_index;
  for (const auto &p : points)
    color_index.emplace(by_speaker ? p.speaker_id : p.phrase_id, 0);
  size_t next = 0;
  for (auto &[key, idx] : color_index) idx = next++;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kSize);
  for (const auto &p : points) {
    const size_t idx = color_index.at(by_speaker ? p.speaker_id : p.phrase_id);
    // Golden-angle hue spacing keeps neighbouring labels distinguishable.
    const double hue = std::fmod(static_cast<double>(idx) * 137.508, 360.0);
    const double cx = kMargin + (p.x - xmin) / xr * (kSize - 2 * kMargin);
    const double cy = kSize - kMargin - (p.y - ymin) / yr * (kSize - 2 * kMargin);
    svg += fmt::format(
        "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"hsl({:.1f},70%,45%)\">"
        "<title>{}</title></circle>\n",
        cx, cy, hue, p.utterance_id);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace dsv
