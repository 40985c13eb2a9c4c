// tests/test-evaluation.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dsv/evaluation.h"
#include "oracles.h"
#include "test-util.h"

using namespace dsv;

namespace {

Vector Vec(std::initializer_list<double> v) {
  Vector out(static_cast<int64_t>(v.size()));
  int64_t i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<double> Gaussian(int n, double mean, std::mt19937_64 *gen) {
  std::normal_distribution<double> d(mean, 1.0);
  std::vector<double> out(n);
  for (auto &x : out) x = d(*gen);
  return out;
}

}  // namespace

TEST_CASE("cosine similarity") {
  CHECK(Cosine(Vec({1, 0}), Vec({0, 1})) == 0.0);
  CHECK(Cosine(Vec({1, 2}), Vec({2, 4})) == doctest::Approx(1.0));
  CHECK(Cosine(Vec({1, 2}), Vec({-1, -2})) == doctest::Approx(-1.0));
  CHECK(Cosine(Vec({1, 1}), Vec({1, 0})) == doctest::Approx(1.0 / std::sqrt(2.0)));
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vector u = oracle::RandomMatrix(6, 1, &rng).col(0);
    const Vector v = oracle::RandomMatrix(6, 1, &rng).col(0);
    const double c = Cosine(u, v);
    CHECK(c == doctest::Approx(Cosine(v, u)));
    CHECK(c == doctest::Approx(Cosine(3.5 * u, 0.25 * v)));
    CHECK(std::abs(c) <= 1.0 + 1e-12);
  }
  CHECK_THROWS_CODE(Cosine(Vec({0, 0}), Vec({1, 0})), kInvalidArgument);
  CHECK_THROWS_CODE(Cosine(Vec({1, 0, 0}), Vec({1, 0})), kDimensionMismatch);
}

TEST_CASE("enrollment model is the mean") {
  const std::vector<Vector> v = {Vec({1, 2}), Vec({3, 6})};
  CHECK(BuildEnrollModel(v) == Vec({2, 4}));
  CHECK_THROWS(BuildEnrollModel(std::span<const Vector>()));
}

TEST_CASE("scoring trials") {
  EnrollmentSet enroll;
  enroll[{"s1", "p1"}] = {Vec({1, 0}), Vec({1, 0.2})};
  enroll[{"s2", "p1"}] = {Vec({0, 1})};
  std::map<std::string, Vector> tests = {{"u1", Vec({1, 0.1})}, {"u2", Vec({0, 2})}};
  std::vector<TrialRecord> trials = {{{"s2", "p1"}, "u1", TrialLabel::kImpostor},
                                     {{"s1", "p1"}, "u1", TrialLabel::kTarget},
                                     {{"s2", "p1"}, "u2", TrialLabel::kTarget}};
  const ScoreSet s = ScoreTrials(enroll, tests, trials);
  REQUIRE(s.size() == 3);
  CHECK(s[0].trial.model.speaker_id == "s2");
  CHECK(s[1].score == doctest::Approx(1.0));  // the test equals the enrollment mean
  CHECK(s[2].score == doctest::Approx(1.0));
  CHECK(s[0].score == doctest::Approx(Cosine(Vec({0, 1}), Vec({1, 0.1}))));

  const ScoreSet m = ScoreTrials(enroll, tests, trials, EnrollRule::kMaxScore);
  CHECK(m[1].score == doctest::Approx(std::max(Cosine(Vec({1, 0}), Vec({1, 0.1})),
                                               Cosine(Vec({1, 0.2}), Vec({1, 0.1})))));
  trials.push_back({{"s3", "p1"}, "u1", TrialLabel::kImpostor});
  CHECK_THROWS_CODE(ScoreTrials(enroll, tests, trials), kUnknownId);
  trials.back() = {{"s1", "p1"}, "u9", TrialLabel::kImpostor};
  CHECK_THROWS_CODE(ScoreTrials(enroll, tests, trials), kUnknownId);
  CHECK(ParseEnrollRule("max") == EnrollRule::kMaxScore);
  CHECK_THROWS_CODE(ParseEnrollRule("median"), kInvalidConfig);
}

TEST_CASE("EER worked example") {
  // Thresholds 0.2 .. 0.95: at 0.8 one target and one nontarget are misclassified.
  const std::vector<double> tar = {0.3, 0.8, 0.9}, non = {0.2, 0.4, 0.95};
  const EerResult r = ComputeEer(tar, non);
  CHECK(r.eer == doctest::Approx(1.0 / 3.0));
  CHECK(r.threshold == doctest::Approx(0.8));
  CHECK(r.num_target == 3);
  CHECK(r.num_nontarget == 3);
  CHECK(FormatEerReport(r).rfind("eer=0.333333 threshold=0.800000 n_target=3", 0) == 0);
  CHECK(oracle::BruteForceEer(tar, non) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("EER limits") {
  CHECK(ComputeEer(std::vector<double>{2, 3}, std::vector<double>{0, 1}).eer == 0.0);
  CHECK(ComputeEer(std::vector<double>{0, 1}, std::vector<double>{2, 3}).eer == 1.0);
  std::mt19937_64 gen(3);
  const auto tar = Gaussian(4000, 0.0, &gen), non = Gaussian(4000, 0.0, &gen);
  CHECK(std::abs(ComputeEer(tar, non).eer - 0.5) < 0.03);
  // Unit-variance classes two apart: EER = Phi(-1).
  const auto far = Gaussian(20000, 2.0, &gen), near = Gaussian(20000, 0.0, &gen);
  CHECK(std::abs(ComputeEer(far, near).eer - 0.5 * std::erfc(1.0 / std::sqrt(2.0))) < 0.01);
  CHECK_THROWS_CODE(ComputeEer(std::vector<double>{}, std::vector<double>{1}), kInvalidArgument);
}

TEST_CASE("EER agrees with a brute-force threshold sweep") {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> count(1, 25), quant(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    auto tar = Gaussian(count(gen), 1.0, &gen), non = Gaussian(count(gen), 0.0, &gen);
    if (quant(gen)) {  // coarse scores make ties common
      for (auto &x : tar) x = std::round(x * 2) / 2;
      for (auto &x : non) x = std::round(x * 2) / 2;
    }
    CAPTURE(trial);
    CHECK(ComputeEer(tar, non).eer == doctest::Approx(oracle::BruteForceEer(tar, non)).epsilon(1e-9));
  }
}

TEST_CASE("EER is invariant under increasing transforms") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto tar = Gaussian(30, 1.0, &gen), non = Gaussian(40, 0.0, &gen);
    const double base = ComputeEer(tar, non).eer;
    for (auto *v : {&tar, &non})
      for (auto &x : *v) x = std::exp(3.0 * x) + 7.0;
    CHECK(ComputeEer(tar, non).eer == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("DET points") {
  std::mt19937_64 gen(6);
  const auto tar = Gaussian(50, 1.0, &gen), non = Gaussian(60, 0.0, &gen);
  const auto pts = DetPoints(tar, non);
  CHECK(pts.size() == 111);
  CHECK(pts.front().far == 1.0);
  CHECK(pts.front().frr == 0.0);
  CHECK(pts.back().far == 0.0);
  CHECK(pts.back().frr == 1.0);
  CHECK(std::isinf(pts.back().threshold));
  for (size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].threshold > pts[i - 1].threshold);
    CHECK(pts[i].far <= pts[i - 1].far);
    CHECK(pts[i].frr >= pts[i - 1].frr);
  }
  // Rates counted directly at one threshold.
  const DetPoint &p = pts[40];
  const double far = std::count_if(non.begin(), non.end(), [&](double s) { return s >= p.threshold; }) / 60.0;
  const double frr = std::count_if(tar.begin(), tar.end(), [&](double s) { return s < p.threshold; }) / 50.0;
  CHECK(p.far == far);
  CHECK(p.frr == frr);
}

TEST_CASE("PCA") {
  Rng rng(7);
  std::vector<Vector> v;
  // Points on a line along (3,4)/5 plus small noise in the third axis.
  for (int i = 0; i < 40; ++i) {
    const double t = (i - 20) * 0.5;
    v.push_back(Vec({1 + 0.6 * t, 2 + 0.8 * t, 0.01 * ((i * 7) % 5 - 2)}));
  }
  const PcaResult r = Pca(v, 2);
  CHECK((r.components.transpose() * r.components - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.components(0, 0) == doctest::Approx(0.6));
  CHECK(r.components(1, 0) == doctest::Approx(0.8));
  CHECK(r.variances[0] >= r.variances[1]);
  CHECK(std::abs(r.coords.col(0).mean()) < 1e-10);
  // Variance of projected coordinates equals the reported variance.
  CHECK(r.coords.col(0).squaredNorm() / 40.0 == doctest::Approx(r.variances[0]));
  // Mean shift does not change the coordinates.
  std::vector<Vector> shifted = v;
  for (auto &x : shifted) x += Vec({10, -3, 5});
  CHECK((PcaProject(shifted, 2) - r.coords).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_CODE(Pca(std::vector<Vector>{Vec({1, 2})}), kInvalidArgument);
  CHECK_THROWS_CODE(Pca(v, 4), kInvalidArgument);
}

TEST_CASE("trial and score files round-trip") {
  testing::TempDir dir("eval");
  const std::vector<TrialRecord> trials = {{{"e001", "p01"}, "e001_p01_s4", TrialLabel::kTarget},
                                           {{"e001", "p01"}, "e002_p01_s4", TrialLabel::kImpostor},
                                           {{"e001", "p01"}, "e001_p02_s4", TrialLabel::kWrongPhrase}};
  WriteTrials(dir / "trials.txt", trials);
  const auto back = ReadTrials(dir / "trials.txt");
  REQUIRE(back.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back[i].model == trials[i].model);
    CHECK(back[i].test_utterance_id == trials[i].test_utterance_id);
    CHECK(back[i].label == trials[i].label);
  }
  ScoreSet scores;
  for (size_t i = 0; i < 3; ++i) scores.push_back({trials[i], 0.25 * static_cast<double>(i) - 0.1});
  WriteScores(dir / "scores.txt", scores);
  const ScoreSet s = ReadScores(dir / "scores.txt");
  REQUIRE(s.size() == 3);
  CHECK(s[2].score == doctest::Approx(0.4));
  CHECK(s[1].trial.label == TrialLabel::kImpostor);
  WriteScores(dir / "again.txt", s);
  CHECK(testing::Slurp(dir / "again.txt") == testing::Slurp(dir / "scores.txt"));

  WriteStringToFile(dir / "bad.txt", "a\tb\tc\n");
  CHECK_THROWS_CODE(ReadTrials(dir / "bad.txt"), kFormat);
  WriteStringToFile(dir / "bad2.txt", "a\tb\tc\ttarget\tnan\n");
  CHECK_THROWS_CODE(ReadScores(dir / "bad2.txt"), kFormat);
  CHECK_THROWS_CODE(ParseTrialLabel("maybe"), kFormat);
}

TEST_CASE("trial generation labels") {
  CorpusManifest m;
  for (const std::string spk : {"e001", "e002"})
    for (const std::string ph : {"p01", "p02"})
      for (int s = 1; s <= 3; ++s)
        m.Add({spk + "_" + ph + "_s" + std::to_string(s), spk, ph,
               s == 1 ? Partition::kEnroll : Partition::kTest, "x.feats"});
  m.Add({"b001_p01_s1", "b001", "p01", Partition::kTrain, "x.feats"});
  const auto trials = GenerateTrials(m);
  CHECK(trials.size() == 4 * 8);
  int counts[3] = {0, 0, 0};
  for (const auto &t : trials) {
    const ManifestEntry &e = m.Find(t.test_utterance_id);
    CHECK(e.partition == Partition::kTest);
    ++counts[static_cast<int>(t.label)];
    if (t.label == TrialLabel::kTarget) CHECK((e.speaker_id == t.model.speaker_id && e.phrase_id == t.model.phrase_id));
    if (t.label == TrialLabel::kImpostor) CHECK(e.speaker_id != t.model.speaker_id);
    if (t.label == TrialLabel::kWrongPhrase) CHECK((e.speaker_id == t.model.speaker_id && e.phrase_id != t.model.phrase_id));
  }
  CHECK(counts[0] == 8);
  CHECK(counts[1] == 16);
  CHECK(counts[2] == 8);
}

TEST_CASE("projection outputs") {
  testing::TempDir dir("proj");
  const std::vector<ProjectedPoint> pts = {{"u1", "s1", "p1", 0.5, -1.0},
                                           {"u2", "s2", "p1", 1.5, 2.0}};
  WriteProjectionCsv(dir / "pca.csv", pts);
  CHECK(testing::Slurp(dir / "pca.csv") ==
        "utterance_id,speaker_id,phrase_id,x,y\nu1,s1,p1,0.500000,-1.000000\n"
        "u2,s2,p1,1.500000,2.000000\n");
  const std::string svg = ProjectionSvg(pts, true);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}
