// tests/acceptance.cc

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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <regex>
#include <sstream>
#include <sys/wait.h>

#include "dsv/alignment.h"
#include "dsv/config.h"
#include "dsv/corpus.h"
#include "dsv/evaluation.h"
#include "dsv/hmm.h"
#include "dsv/model-io.h"
#include "dsv/nnet-layers.h"
#include "dsv/nnet-network.h"
#include "dsv/pipeline.h"
#include "oracles.h"
#include "test-util.h"

using namespace dsv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

const Architecture kAllArchitectures[] = {
    Architecture::kFE3C_mean, Architecture::kSignal_align, Architecture::kFE1C_k1_align,
    Architecture::kFE1C_k3_align, Architecture::kFE3C_k3_align};

AlignmentMatrix RandomAlignment(int64_t T, int32_t Q, Rng *rng) {
  StateSequence s;
  s.states = oracle::RandomStaircase(T, Q, rng);
  return ExpandAlignment(s, Q);
}

double RelErr(const Matrix &a, const Matrix &b) {
  const double d = std::max(a.norm(), b.norm());
  return d == 0.0 ? 0.0 : (a - b).norm() / d;
}

Matrix NumericGradient(Matrix *m, const std::function<double()> &f, double eps = 1e-6) {
  Matrix g(m->rows(), m->cols());
  for (int64_t i = 0; i < m->size(); ++i) {
    const double keep = (*m)(i);
    (*m)(i) = keep + eps;
    const double up = f();
    (*m)(i) = keep - eps;
    const double down = f();
    (*m)(i) = keep;
    g(i) = (up - down) / (2 * eps);
  }
  return g;
}

// 1. The alignment matrix of the worked example.
Outcome ExampleAlignment() {
  StateSequence s;
  s.states = {0, 0, 0, 1, 1, 2, 2, 3};  // 1-based: 1,1,1,2,2,3,3,4
  const auto start = std::chrono::steady_clock::now();
  const Matrix a = ExpandAlignment(s, 4).Dense();
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  Matrix expect(8, 4);
  expect << 1, 0, 0, 0,
            1, 0, 0, 0,
            1, 0, 0, 0,
            0, 1, 0, 0,
            0, 1, 0, 0,
            0, 0, 1, 0,
            0, 0, 1, 0,
            0, 0, 0, 1;
  return {a == expect && ms < 1.0, fmt::format("exact 8x4 match={}, {:.3f} ms", a == expect, ms)};
}

// 2. Pooling against per-state loops.
Outcome PoolingOracle() {
  Rng rng(2);
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> dim(1, 8);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int C = dim(gen), Q = dim(gen);
    const int T = std::uniform_int_distribution<int>(Q, 8)(gen);
    const Matrix x = oracle::RandomMatrix(C, T, &rng);
    StateSequence s;
    s.states = oracle::RandomStaircase(T, Q, &rng);
    const Matrix got = PoolSupervector(x, ExpandAlignment(s, Q)).per_state;
    worst = std::max(worst, (got - oracle::BruteForcePool(x, s.states, Q)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, fmt::format("1000 instances, max abs diff {:.2e}", worst)};
}

// 3. Finite-difference checks per layer and end to end.
Outcome GradientSuite() {
  Rng rng(3);
  constexpr int C = 3, T = 10, Q = 2;
  double layer_err = 0.0;
  for (int K : {1, 3}) {
    Conv1dLayer conv(C, 4, K);
    conv.InitRandom(&rng);
    conv.bias() = oracle::RandomMatrix(4, 1, &rng);
    Matrix x = oracle::RandomMatrix(C, T, &rng);
    const Matrix g = oracle::RandomMatrix(4, T, &rng);
    std::vector<Matrix> gw(K, Matrix::Zero(4, C));
    Matrix gb = Matrix::Zero(4, 1);
    const Matrix gx = conv.Backward(g, x, gw, &gb);
    auto loss = [&] { return (g.array() * conv.Forward(x).array()).sum(); };
    layer_err = std::max(layer_err, RelErr(gx, NumericGradient(&x, loss)));
    layer_err = std::max(layer_err, RelErr(gb, NumericGradient(&conv.bias(), loss)));
    for (int k = 0; k < K; ++k)
      layer_err = std::max(layer_err, RelErr(gw[k], NumericGradient(&conv.weight(k), loss)));
  }
  {
    Matrix x = oracle::RandomMatrix(C, T, &rng);
    for (int64_t i = 0; i < x.size(); ++i)
      if (std::abs(x(i)) < 0.05) x(i) = 0.05;
    const Matrix g = oracle::RandomMatrix(C, T, &rng);
    auto loss = [&] { return (g.array() * ReluForward(x).array()).sum(); };
    layer_err = std::max(layer_err, RelErr(ReluBackward(g, x), NumericGradient(&x, loss)));
  }
  {
    Matrix x = oracle::RandomMatrix(C, T, &rng);
    const AlignmentMatrix a = RandomAlignment(T, Q, &rng);
    const Matrix g = oracle::RandomMatrix(C, Q, &rng);
    auto loss = [&] { return (g.array() * PoolSupervector(x, a).per_state.array()).sum(); };
    layer_err = std::max(layer_err, RelErr(PoolBackward(g, a), NumericGradient(&x, loss)));
  }
  {
    AffineLayer fc(C * Q, 3);
    fc.InitRandom(&rng);
    fc.bias() = oracle::RandomMatrix(3, 1, &rng);
    Matrix e = oracle::RandomMatrix(C * Q, 1, &rng);
    auto loss = [&] { return SoftmaxCrossEntropy(fc.Forward(e.col(0)), 1, nullptr); };
    Vector gl;
    SoftmaxCrossEntropy(fc.Forward(e.col(0)), 1, &gl);
    Matrix gw = Matrix::Zero(3, C * Q), gb = Matrix::Zero(3, 1);
    const Vector ge = fc.Backward(gl, e.col(0), &gw, &gb);
    layer_err = std::max(layer_err, RelErr(gw, NumericGradient(&fc.weight(), loss)));
    layer_err = std::max(layer_err, RelErr(gb, NumericGradient(&fc.bias(), loss)));
    layer_err = std::max(layer_err, RelErr(ge, NumericGradient(&e, loss)));
  }
  double net_err = 0.0, fault_err = 1e300;
  for (auto arch : kAllArchitectures) {
    Network net(NetworkConfig::ForArchitecture(arch, C, 4, Q, 3));
    net.InitRandom(&rng, 1.0);
    const Matrix x = oracle::RandomMatrix(C, T, &rng);
    const AlignmentMatrix a = RandomAlignment(T, Q, &rng);
    net_err = std::max(net_err, GradCheckNetwork(net, x, a, 1).max_relative_error);
    const GradCheckReport bad = GradCheckNetwork(
        net, x, a, 1, 1e-5, 0, [](Gradients *g, Matrix *) { g->front() *= 2.0; });
    fault_err = std::min(fault_err, bad.max_relative_error);
  }
  const bool pass = layer_err < 1e-6 && net_err < 1e-4 && fault_err > 0.3;
  return {pass, fmt::format("per-layer {:.2e}, end-to-end {:.2e} over 5 architectures, "
                            "planted fault {:.3f}",
                            layer_err, net_err, fault_err)};
}

// 4. Viterbi against exhaustive enumeration.
Outcome ViterbiOracle() {
  Rng rng(4);
  std::mt19937_64 gen(4);
  double worst = 0.0;
  int invalid = 0;
  for (int i = 0; i < 500; ++i) {
    const int Q = std::uniform_int_distribution<int>(1, 4)(gen);
    const int T = std::uniform_int_distribution<int>(Q, 8)(gen);
    const int C = std::uniform_int_distribution<int>(1, 3)(gen);
    const LeftRightHmm hmm = oracle::RandomHmm(Q, C, &rng);
    const FeatureMatrix f(oracle::RandomMatrix(C, T, &rng, 1.5));
    const StateSequence s = Viterbi(hmm, f);
    const auto best = oracle::EnumerateBestPath(hmm, f.data);
    worst = std::max(worst, std::abs(s.log_likelihood - best.best_score));
    worst = std::max(worst, std::abs(oracle::PathScore(hmm, f.data, s.states) - best.best_score));
    try {
      s.Validate(Q);
    } catch (const Error &) {
      ++invalid;
    }
  }
  return {worst <= 1e-9 && invalid == 0,
          fmt::format("500 models, max |diff| {:.2e}, invariant violations {}", worst, invalid)};
}

// 5. Segmental training never lowers the Viterbi likelihood.
Outcome SegmentalMonotonicity() {
  double worst_drop = 0.0;
  int iterations = 0;
  for (int run = 0; run < 20; ++run) {
    SynthSpec spec;
    spec.speakers = 0;
    spec.train_speakers = 6;
    spec.phrases = 1;
    spec.sessions = 3;
    spec.channels = 8;
    spec.segments = 6;
    const SynthCorpus corpus = GenerateSynthCorpus(spec, 100 + run);
    const LeftRightHmm init = InitUniformSegmentation(corpus.features, 2 + run % 9);
    const HmmTrainResult r = TrainSegmental(init, corpus.features, 30, 0.0);
    iterations += r.iterations;
    for (size_t i = 1; i < r.log_likelihood.size(); ++i)
      worst_drop = std::max(worst_drop, r.log_likelihood[i - 1] - r.log_likelihood[i]);
  }
  return {worst_drop <= 1e-9, fmt::format("20 runs, {} re-estimations, largest drop {:.2e}",
                                          iterations, worst_drop)};
}

// 6. EER against a brute-force threshold sweep.
Outcome EerOracle() {
  std::mt19937_64 gen(6);
  double worst = 0.0;
  int64_t largest = 0;
  for (int i = 0; i < 100; ++i) {
    // Log-uniform sizes up to 10^4 trials; the last sets are at full size.
    const int64_t n = i >= 95 ? 10000
                              : static_cast<int64_t>(std::exp(
                                    std::uniform_real_distribution<double>(std::log(4.0),
                                                                           std::log(1e4))(gen)));
    const int64_t nt = std::max<int64_t>(1, n / 5);
    const double sep = std::uniform_real_distribution<double>(0.0, 3.0)(gen);
    std::normal_distribution<double> tar_d(sep, 1.0), non_d(0.0, 1.0);
    std::vector<double> tar(nt), non(n - nt);
    for (auto &x : tar) x = tar_d(gen);
    for (auto &x : non) x = non_d(gen);
    if (i % 4 == 0) {  // quantized scores produce ties
      for (auto &x : tar) x = std::round(x * 4) / 4;
      for (auto &x : non) x = std::round(x * 4) / 4;
    }
    largest = std::max(largest, n);
    worst = std::max(worst, std::abs(ComputeEer(tar, non).eer - oracle::BruteForceEer(tar, non)));
  }
  const double hand = ComputeEer(std::vector<double>{0.9, 0.8, 0.3},
                                 std::vector<double>{0.7, 0.2, 0.1}).eer;
  const double perfect = ComputeEer(std::vector<double>{0.9, 0.8, 0.3},
                                    std::vector<double>{0.2, 0.1, 0.0}).eer;
  const bool pass = worst <= 1e-9 && hand == 1.0 / 3.0 && perfect == 0.0;
  return {pass, fmt::format("100 sets up to {} trials, max |diff| {:.2e}; hand example {}, "
                            "perfect separation {}",
                            largest, worst, hand, perfect)};
}

struct PipelineEers {
  double mean = 0.0, align = 0.0, signal = 0.0;
};

// 7. The alignment systems against mean pooling on a synthetic corpus.
Outcome QualitativeReproduction(const std::string &source_dir, double *seconds) {
  const auto start = std::chrono::steady_clock::now();
  testing::TempDir dir("acc7");
  ExperimentConfig c = ExperimentConfig::FromFile(source_dir + "/configs/synthetic.ini");
  c.corpus_dir = dir / "corpus";
  c.output_dir = dir / "out";
  std::ostringstream log, out;
  CmdSynth(c, log);
  CmdTrainHmm(c, log);
  PipelineEers e;
  for (auto [arch, eer] : {std::pair{Architecture::kFE3C_mean, &e.mean},
                           std::pair{Architecture::kFE3C_k3_align, &e.align},
                           std::pair{Architecture::kSignal_align, &e.signal}}) {
    c.train.architecture = arch;
    CmdTrainDnn(c, log);
    CmdExtract(c, log);
    CmdScore(c, log);
    *eer = CmdEval(c, out, log).eer;
  }
  *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = c.synth.speakers == 10 && c.synth.phrases == 5 && c.synth.sessions == 6 &&
                    c.synth.enroll_sessions == 3 && c.hmm.num_states == 10 &&
                    e.align * 2.0 <= e.mean && e.mean > 0.0 && e.signal < e.mean &&
                    *seconds < 600.0;
  return {pass, fmt::format("pooled EER FE3C_mean {:.4f}, FE3C_k3_align {:.4f}, "
                            "Signal_align {:.4f}; 10 spk x 5 phr x 6 sess, Q=10, {:.0f} s",
                            e.mean, e.align, e.signal, *seconds)};
}

// 8. Mean pooling is alignment pooling with a single state.
Outcome MeanIsSingleState() {
  Rng rng(8);
  int mismatches = 0;
  for (int i = 0; i < 50; ++i) {
    const int T = 5 + i % 20;
    Network mean(NetworkConfig::ForArchitecture(Architecture::kFE3C_mean, 4, 6, 1, 3));
    Network align(NetworkConfig::ForArchitecture(Architecture::kFE3C_k3_align, 4, 6, 1, 3));
    mean.InitRandom(&rng, 1.0);
    auto src = mean.Parameters();
    auto dst = align.Parameters();
    for (size_t k = 0; k < src.size(); ++k) *dst[k] = *src[k];
    const Matrix x = oracle::RandomMatrix(4, T, &rng);
    const AlignmentMatrix any = RandomAlignment(T, 1 + i % 4, &rng);
    const Vector a = mean.Embed(x, any);
    if (!(a == align.Embed(x, AlignmentMatrix::SingleState(T)))) ++mismatches;
    if (!(mean.Logits(x, any) == align.Logits(x, AlignmentMatrix::SingleState(T)))) ++mismatches;
    if (!(a == MeanPool(mean.FrontEnd(x)))) ++mismatches;
  }
  return {mismatches == 0, fmt::format("50 instances, {} bitwise mismatches", mismatches)};
}

int RunBinary(const std::string &args) {
  const int rc = std::system((std::string(DSV_BINARY) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// 9. Two runs of the whole command-line pipeline on the experiment config.
Outcome Reproducibility(const std::string &source_dir) {
  testing::TempDir dir("acc9");
  std::string ini = testing::Slurp(source_dir + "/configs/synthetic.ini");
  for (const std::string key : {"corpus", "output"}) {
    const std::regex line("(^|\\n)" + key + " *=[^\\n]*");
    ini = std::regex_replace(ini, line, "$1" + key + " = " + (key == "corpus" ? "corpus" : "out"));
  }
  if (ini.find("\ncorpus = corpus") == std::string::npos ||
      ini.find("\noutput = out") == std::string::npos)
    return {false, "could not relocate paths in configs/synthetic.ini"};
  const char *archs[] = {"FE3C_mean", "FE3C_k3_align", "Signal_align"};
  std::vector<std::string> files;
  for (const char *arch : archs)
    for (const std::string f : {"sv/{}/enroll.svc", "sv/{}/enroll.svc.idx", "sv/{}/test.svc",
                                "sv/{}/test.svc.idx", "scores/{}.txt",
                                "eval/{}/eer.txt", "eval/{}/breakdown.txt", "model/{}.json"})
      files.push_back(fmt::format(fmt::runtime(f), arch));
  files.push_back("trials.txt");
  files.push_back("align/alignments.txt");

  std::vector<std::vector<std::string>> runs;
  for (const char *run : {"a", "b"}) {
    const std::string root = dir / run;
    fs::create_directories(root);
    WriteStringToFile(root + "/run.ini", ini);
    const std::string cfg = "--config " + root + "/run.ini --jobs 1 ";
    for (const char *step : {"synth", "train-hmm", "align"})
      if (RunBinary(cfg + step) != 0) return {false, fmt::format("dsv {} failed", step)};
    for (const char *arch : archs)
      for (const char *step : {"train-dnn", "extract", "score", "eval"})
        if (RunBinary(cfg + step + " --arch " + arch) != 0)
          return {false, fmt::format("dsv {} --arch {} failed", step, arch)};
    std::vector<std::string> contents;
    for (const auto &f : files) contents.push_back(testing::Slurp(root + "/out/" + f));
    runs.push_back(std::move(contents));
  }
  int differing = 0;
  for (size_t i = 0; i < files.size(); ++i) differing += runs[0][i] != runs[1][i];
  return {differing == 0, fmt::format("{} artifacts compared (archives, scores, EER reports, "
                                      "models), {} differ",
                                      files.size(), differing)};
}

// 10. write -> read -> write reproduces the same bytes.
Outcome RoundTrips() {
  testing::TempDir dir("acc10");
  Rng rng(10);
  std::mt19937_64 gen(10);
  std::uniform_int_distribution<int> small(1, 12);
  int differing = 0;
  for (int i = 0; i < 100; ++i) {
    FeatureMatrix f(oracle::RandomMatrix(small(gen), small(gen), &rng, 1e3 * (i % 3) + 1e-3));
    if (i % 10 == 0) f.data(0, 0) = -0.0;
    WriteFeatures(dir / "a.feats", f);
    WriteFeatures(dir / "b.feats", ReadFeatures(dir / "a.feats"));
    differing += testing::Slurp(dir / "a.feats") != testing::Slurp(dir / "b.feats");

    SupervectorArchive ar;
    for (int u = 0, n = small(gen); u < n; ++u) {
      const int C = small(gen), Q = small(gen);
      ar.Add(fmt::format("utt{:03d}", u), oracle::RandomMatrix(C * Q, 1, &rng).col(0), C);
    }
    ar.Write(dir / "a.svc");
    SupervectorArchive::Read(dir / "a.svc").Write(dir / "b.svc");
    differing += testing::Slurp(dir / "a.svc") != testing::Slurp(dir / "b.svc");
    differing += testing::Slurp(dir / "a.svc.idx") != testing::Slurp(dir / "b.svc.idx");

    const Architecture arch = kAllArchitectures[i % 5];
    const int Q = 1 + small(gen) % 4, C = small(gen);
    ModelBundle b{Network(NetworkConfig::ForArchitecture(arch, C, 1 + small(gen), Q, 2 + i % 3))};
    b.network.InitRandom(&rng, 1.0);
    b.fingerprint = fmt::format("{:016x}", gen());
    b.cmvn = i % 2;
    b.hmm_static_only = i % 3 == 0;
    b.length_norm = i % 2 ? LengthNormMode::kLinearInterp : LengthNormMode::kZeroPad;
    for (int k = 0; k < 2 + i % 3; ++k)
      b.class_map.push_back({fmt::format("b{:03d}", k), fmt::format("p{:02d}", k % 2 + 1)});
    for (int p = 1; p <= 2; ++p) {
      LeftRightHmm h = oracle::RandomHmm(Q, C, &rng);
      h.set_target_frames(Q + small(gen));
      b.hmms.emplace(fmt::format("p{:02d}", p), h);
    }
    WriteBundle(dir / "a.json", b);
    WriteBundle(dir / "b.json", ReadBundle(dir / "a.json"));
    differing += testing::Slurp(dir / "a.json") != testing::Slurp(dir / "b.json");
  }
  return {differing == 0,
          fmt::format("100 cases each of features, archives and model bundles, {} differ", differing)};
}

}  // namespace

int main() {
  ::unsetenv("OUTPUT_DIR");
  double pipeline_seconds = 0.0;
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"alignment matrix of the worked example", ExampleAlignment},
      {"supervector pooling matches per-state means", PoolingOracle},
      {"finite-difference gradient suite", GradientSuite},
      {"Viterbi matches exhaustive enumeration", ViterbiOracle},
      {"segmental training is monotone", SegmentalMonotonicity},
      {"EER matches brute-force sweep", EerOracle},
      {"alignment beats mean pooling on synthetic data",
       [&] { return QualitativeReproduction(DSV_SOURCE_DIR, &pipeline_seconds); }},
      {"mean head equals single-state align head", MeanIsSingleState},
      {"pipeline is byte-for-byte reproducible",
       [] { return Reproducibility(DSV_SOURCE_DIR); }},
      {"format round trips are byte-identical", RoundTrips},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    fmt::print("{} [{}] {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
               o.detail, s);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
