// dsv.cc

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

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "dsv/config.h"
#include "dsv/error.h"
#include "dsv/pipeline.h"

int main(int argc, char **argv) {
  using namespace dsv;
  const char *usage =
      "Text-dependent speaker verification with HMM-aligned supervectors.\n"
      "Typical run: synth, train-hmm, train-dnn, extract, score, eval.";
  CLI::App app{usage, "dsv"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, arch_tag, scores_path;
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
  int verbose = 0;
  app.add_option("--config", config_path, "Experiment config (INI)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for every stochastic step");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", verbose, "More progress output (repeatable)");

  struct Sub { const char *name, *help; };
  const Sub subs[] = {
      {"synth", "Generate the synthetic corpus, or compute RSR2015 features"},
      {"train-hmm", "Train one left-to-right HMM per phrase"},
      {"align", "Write Viterbi state sequences for every utterance"},
      {"train-dnn", "Train the network for one architecture"},
      {"extract", "Write enroll/test supervector archives"},
      {"score", "Cosine-score the trial list"},
      {"eval", "EER report, DET points and PCA projection"},
      {"gradcheck", "Finite-difference check of the network gradients"},
  };
  for (const auto &s : subs) {
    CLI::App *sub = app.add_subcommand(s.name, s.help);
    const std::string name = s.name;
    if (name == "train-dnn" || name == "extract" || name == "score" || name == "eval")
      sub->add_option("--arch", arch_tag,
                      "FE3C_mean, Signal_align, FE1C_k1_align, FE1C_k3_align or "
                      "FE3C_k3_align");
    if (name == "eval")
      sub->add_option("--scores", scores_path, "Score file (default: the arch's scores)");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig c =
        config_path.empty()
            ? ExperimentConfig::FromString("", std::filesystem::current_path().string())
            : ExperimentConfig::FromFile(config_path);
    if (seed) {
      c.seed = *seed;
      c.train.seed = *seed;
    }
    if (jobs) c.jobs = c.train.jobs = *jobs;
    c.verbose = std::max(c.verbose, verbose);
    if (!arch_tag.empty()) c.train.architecture = ParseArchitecture(arch_tag);

    std::ostringstream sink;
    std::ostream &log = c.verbose > 0 ? std::cerr : sink;
    if (command == "synth") CmdSynth(c, log);
    else if (command == "train-hmm") CmdTrainHmm(c, log);
    else if (command == "align") CmdAlign(c, log);
    else if (command == "train-dnn") CmdTrainDnn(c, log);
    else if (command == "extract") CmdExtract(c, log);
    else if (command == "score") CmdScore(c, log);
    else if (command == "eval") CmdEval(c, std::cout, log, scores_path);
    else if (command == "gradcheck") {
      const double err = CmdGradcheck(c, std::cout);
      if (!(err <= 1e-4)) {
        std::cerr << "dsv gradcheck: relative error " << err << " exceeds 1e-4\n";
        return 1;
      }
    }
  } catch (const Error &e) {
    std::cerr << "dsv " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "dsv " << command << ": unexpected error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
