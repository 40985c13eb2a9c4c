// tests/test-cli.cc

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

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "dsv/config.h"
#include "dsv/model-io.h"
#include "dsv/pipeline.h"
#include "oracles.h"
#include "test-util.h"

using namespace dsv;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status;
  std::string out;
};

// Runs the dsv binary with `args`, capturing stdout.
RunResult RunDsv(const std::string &args, const testing::TempDir &dir) {
  const std::string out = dir / "stdout.txt";
  const std::string cmd = std::string(DSV_BINARY) + " " + args + " > " + out + " 2> " +
                          (dir / "stderr.txt");
  const int rc = std::system(cmd.c_str());
  RunResult r{WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, ""};
  if (fs::exists(out)) r.out = testing::Slurp(out);
  return r;
}

const char *kTinyIni = R"(
[general]
seed = 11
[paths]
corpus = corpus
output = out
[corpus]
speakers = 3
train_speakers = 3
phrases = 2
sessions = 3
enroll_sessions = 1
channels = 6
segments = 4
[hmm]
states = 3
iters = 5
[network]
epochs = 2
batch_size = 4
width = 8
)";

ModelBundle RandomBundle(Architecture arch, Rng *rng) {
  ModelBundle b{Network(NetworkConfig::ForArchitecture(arch, 4, 5, 3, 2))};
  b.network.InitRandom(rng, 1.0);
  for (auto *p : b.network.Parameters())
    if (p->cols() == 1) *p = oracle::RandomMatrix(p->rows(), 1, rng);
  b.fingerprint = "0123456789abcdef";
  b.cmvn = true;
  b.class_map = {{"b001", "p01"}, {"b002", "p01"}};
  for (const std::string p : {"p01", "p02"}) {
    LeftRightHmm h = oracle::RandomHmm(3, 4, rng);
    h.set_target_frames(17);
    b.hmms.emplace(p, h);
  }
  return b;
}

}  // namespace

TEST_CASE("config parsing") {
  testing::TempDir dir("cfg");
  ::unsetenv("OUTPUT_DIR");
  const ExperimentConfig c = ExperimentConfig::FromString(kTinyIni, dir.str());
  CHECK(c.corpus_dir == dir / "corpus");
  CHECK(c.output_dir == dir / "out");
  CHECK(c.seed == 11u);
  CHECK(c.synth.speakers == 3);
  CHECK(c.hmm.num_states == 3);
  CHECK(c.train.width == 8);
  CHECK(c.Seed() == 11u);

  CHECK_THROWS_CODE(ExperimentConfig::FromString("[hmm]\nstatez = 3\n", dir.str()), kInvalidConfig);
  CHECK_THROWS_CODE(ExperimentConfig::FromString("[extra]\na = 1\n", dir.str()), kInvalidConfig);
  CHECK_THROWS_CODE(ExperimentConfig::FromString("[hmm]\nstates = many\n", dir.str()), kInvalidConfig);
  CHECK_THROWS_CODE(ExperimentConfig::FromString("[network]\narchitecture = FE9C\n", dir.str()),
                    kInvalidConfig);

  ::setenv("OUTPUT_DIR", "/tmp/elsewhere", 1);
  CHECK(ExperimentConfig::FromString(kTinyIni, dir.str()).output_dir == "/tmp/elsewhere");
  ::unsetenv("OUTPUT_DIR");

  const ExperimentConfig unseeded = ExperimentConfig::FromString("", dir.str());
  CHECK_THROWS_CODE(unseeded.Seed(), kInvalidConfig);

  WriteStringToFile(dir / "train.cfg", "epochs = 9\nlr = 0.5\n");
  const ExperimentConfig t =
      ExperimentConfig::FromString("[network]\ntrain_config = train.cfg\n", dir.str());
  CHECK(t.train.epochs == 9);
  CHECK(t.train.lr == 0.5);
  WriteStringToFile(dir / "bad.cfg", "epochz = 9\n");
  TrainConfig tc;
  CHECK_THROWS_CODE(ReadTrainConfigFile(dir / "bad.cfg", &tc), kInvalidConfig);
}

TEST_CASE("feature fingerprint depends on the front-end settings") {
  const ExperimentConfig a = ExperimentConfig::FromString("", "/");
  ExperimentConfig b = a;
  CHECK(a.FeatureFingerprint("x") == b.FeatureFingerprint("x"));
  CHECK(a.FeatureFingerprint("x") != a.FeatureFingerprint("y"));
  b.cmvn = !b.cmvn;
  CHECK(a.FeatureFingerprint("x") != b.FeatureFingerprint("x"));
  CHECK(a.FeatureFingerprint("x").size() == 16);
}

TEST_CASE("HMM documents round-trip byte for byte") {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    LeftRightHmm h = oracle::RandomHmm(1 + i % 5, 3, &rng);
    h.set_target_frames(10 + i);
    const std::string text = HmmToString(h, "p07");
    std::string phrase;
    const LeftRightHmm back = HmmFromString(text, &phrase);
    CHECK(phrase == "p07");
    CHECK(back.target_frames() == 10 + i);
    CHECK(HmmToString(back, phrase) == text);
  }
  std::string text = HmmToString(oracle::RandomHmm(2, 2, &rng), "p");
  const auto at = text.find("\"version\": 1");
  REQUIRE(at != std::string::npos);
  text.replace(at, 12, "\"version\": 9");
  CHECK_THROWS_CODE(HmmFromString(text), kVersionMismatch);
  CHECK_THROWS_CODE(HmmFromString("{}"), kVersionMismatch);
  CHECK_THROWS_CODE(HmmFromString("not json"), kFormat);
}

TEST_CASE("model bundles round-trip and check fingerprints") {
  Rng rng(2);
  testing::TempDir dir("bundle");
  for (auto arch : {Architecture::kFE3C_mean, Architecture::kSignal_align,
                    Architecture::kFE1C_k1_align, Architecture::kFE1C_k3_align,
                    Architecture::kFE3C_k3_align}) {
    const ModelBundle b = RandomBundle(arch, &rng);
    WriteBundle(dir / "m.json", b);
    const ModelBundle back = ReadBundle(dir / "m.json");
    CHECK(back.architecture() == arch);
    CHECK(back.class_map == b.class_map);
    CHECK(back.cmvn);
    const auto p = b.network.Parameters(), q = back.network.Parameters();
    REQUIRE(p.size() == q.size());
    for (size_t i = 0; i < p.size(); ++i) CHECK(*p[i] == *q[i]);
    CHECK(BundleToString(back) == testing::Slurp(dir / "m.json"));
    CHECK_NOTHROW(back.CheckFingerprint("0123456789abcdef"));
    CHECK_THROWS_CODE(back.CheckFingerprint("fedcba9876543210"), kFingerprintMismatch);
  }
  std::string text = BundleToString(RandomBundle(Architecture::kFE3C_mean, &rng));
  text.replace(text.find("dsv-model-bundle"), 16, "dsv-model-bungle");
  CHECK_THROWS_CODE(BundleFromString(text), kVersionMismatch);
}

TEST_CASE("command line pipeline") {
  testing::TempDir dir("cli");
  WriteStringToFile(dir / "tiny.ini", kTinyIni);
  const std::string cfg = "--config " + (dir / "tiny.ini");
  ::unsetenv("OUTPUT_DIR");
  for (const char *step : {"synth", "train-hmm", "align"})
    REQUIRE(RunDsv(cfg + " " + step, dir).status == 0);
  CHECK(fs::exists(dir / "corpus/manifest.tsv"));
  CHECK(fs::exists(dir / "out/hmm/p01.json"));
  CHECK(fs::exists(dir / "out/align/alignments.txt"));

  const std::string arch = " --arch FE1C_k3_align";
  REQUIRE(RunDsv(cfg + " train-dnn" + arch, dir).status == 0);
  CHECK(testing::Slurp(dir / "out/model/FE1C_k3_align_train.csv").rfind("epoch,", 0) == 0);
  REQUIRE(RunDsv(cfg + " extract" + arch, dir).status == 0);
  const std::string enroll = testing::Slurp(dir / "out/sv/FE1C_k3_align/enroll.svc");
  const std::string test = testing::Slurp(dir / "out/sv/FE1C_k3_align/test.svc");
  REQUIRE(RunDsv("extract" + arch + " " + cfg + " --jobs 2", dir).status == 0);
  CHECK(testing::Slurp(dir / "out/sv/FE1C_k3_align/enroll.svc") == enroll);
  CHECK(testing::Slurp(dir / "out/sv/FE1C_k3_align/test.svc") == test);
  REQUIRE(RunDsv(cfg + " score" + arch, dir).status == 0);
  const RunResult ev = RunDsv(cfg + " eval" + arch, dir);
  REQUIRE(ev.status == 0);
  CHECK(ev.out.rfind("eer=", 0) == 0);
  CHECK(fs::exists(dir / "out/eval/FE1C_k3_align/det.csv"));
  CHECK(fs::exists(dir / "out/eval/FE1C_k3_align/pca_speaker.svg"));

  // Hand-written score file with a known answer.
  WriteStringToFile(dir / "hand.txt",
                    "s1\tp1\tu1\ttarget\t0.3\n"
                    "s1\tp1\tu2\ttarget\t0.8\n"
                    "s1\tp1\tu3\ttarget\t0.9\n"
                    "s1\tp1\tu4\tnontarget_impostor\t0.2\n"
                    "s1\tp1\tu5\tnontarget_wrong_phrase\t0.4\n"
                    "s1\tp1\tu6\tnontarget_impostor\t0.95\n");
  const RunResult hand = RunDsv(cfg + " eval --scores " + (dir / "hand.txt"), dir);
  CHECK(hand.status == 0);
  CHECK(hand.out.rfind("eer=0.333333 threshold=0.800000", 0) == 0);

  // The model refuses features produced differently.
  WriteStringToFile(dir / "corpus/features.txt", "source=synthetic;channels=7\n");
  CHECK(RunDsv(cfg + " extract" + arch, dir).status == 2);
  CHECK(testing::Slurp(dir / "stderr.txt").find("fingerprint") != std::string::npos);

  CHECK(RunDsv(cfg + " score --arch FE3C_mean", dir).status == 2);
  CHECK(RunDsv("--config " + (dir / "missing.ini") + " synth", dir).status != 0);
  CHECK(RunDsv("frobnicate", dir).status != 0);
}

TEST_CASE("gradcheck subcommand") {
  testing::TempDir dir("grad");
  const RunResult r = RunDsv("gradcheck --seed 3", dir);
  CHECK(r.status == 0);
  CHECK(r.out.find("max_relative_error=") != std::string::npos);
  for (const char *tag : {"FE3C_mean", "Signal_align", "FE1C_k1_align", "FE1C_k3_align",
                          "FE3C_k3_align"})
    CHECK(r.out.find(tag) != std::string::npos);
}
