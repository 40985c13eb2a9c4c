// config.cc

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

#include "dsv/config.h"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "dsv/error.h"
#include "dsv/io-util.h"

namespace dsv {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> &AllowedKeys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"general", {"seed", "jobs", "verbose"}},
      {"paths", {"corpus", "output"}},
      {"corpus",
       {"source", "speakers", "train_speakers", "phrases", "sessions",
        "enroll_sessions", "channels", "segments", "min_segment_frames",
        "max_segment_frames", "template_scale", "speaker_scale", "session_scale",
        "noise_std", "rsr_root", "rsr_train_speakers", "rsr_enroll_sessions",
        "rsr_phrases"}},
      {"features",
       {"frame_length_ms", "frame_shift_ms", "preemph_coeff", "num_mel_bins",
        "num_ceps", "low_freq", "high_freq", "energy_floor", "delta_width",
        "length_norm", "cmvn"}},
      {"hmm", {"states", "iters", "tol", "var_floor_factor", "static_only"}},
      {"network",
       {"train_config", "seed", "epochs", "batch_size", "lr", "optimizer",
        "momentum", "architecture", "width", "erase_prob", "erase_area_min",
        "erase_area_max", "deterministic"}},
      {"evaluation", {"trials", "enroll_rule", "pca"}},
  };
  return keys;
}

template <typename T>
T Convert(const std::string &section, const std::string &key, const std::string &v) {
  std::istringstream is(v);
  T out{};
  if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    DSV_ERR(kInvalidConfig) << section << "." << key << ": expected a boolean, got '"
                            << v << "'";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else {
    is >> out;
    if (is.fail() || !is.eof())
      DSV_ERR(kInvalidConfig) << section << "." << key << ": cannot parse '" << v << "'";
  }
  return out;
}

// Reads section.key into *out when present.
template <typename T>
void Get(const pt::ptree &section, const std::string &name, const std::string &key,
         T *out) {
  auto v = section.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
  if (v) *out = Convert<T>(name, key, Trim(*v));
}

std::set<int> ParseIntSet(const std::string &key, const std::string &v) {
  std::set<int> out;
  for (const auto &tok : SplitString(v, ',')) {
    const std::string t = Trim(tok);
    if (t.empty()) continue;
    const auto dash = t.find('-');
    if (dash != std::string::npos && dash > 0) {
      const int lo = Convert<int>("corpus", key, t.substr(0, dash));
      const int hi = Convert<int>("corpus", key, t.substr(dash + 1));
      for (int i = lo; i <= hi; ++i) out.insert(i);
    } else {
      out.insert(Convert<int>("corpus", key, t));
    }
  }
  return out;
}

void ApplyTrainKeys(const pt::ptree &s, const std::string &name, TrainConfig *c) {
  Get(s, name, "seed", &c->seed);
  Get(s, name, "epochs", &c->epochs);
  Get(s, name, "batch_size", &c->batch_size);
  Get(s, name, "lr", &c->lr);
  Get(s, name, "momentum", &c->momentum);
  Get(s, name, "width", &c->width);
  Get(s, name, "erase_prob", &c->erase_prob);
  Get(s, name, "erase_area_min", &c->erase_area_min);
  Get(s, name, "erase_area_max", &c->erase_area_max);
  Get(s, name, "deterministic", &c->deterministic);
  std::string v;
  Get(s, name, "optimizer", &v);
  if (!v.empty()) c->optimizer = ParseOptimizer(v);
  v.clear();
  Get(s, name, "architecture", &v);
  if (!v.empty()) c->architecture = ParseArchitecture(v);
}

std::string Resolve(const std::string &base, const std::string &p) {
  if (p.empty() || fs::path(p).is_absolute() || base.empty()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

pt::ptree ParseIni(const std::string &text, const std::string &what) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error &e) {
    DSV_ERR(kInvalidConfig) << what << ": " << e.message() << " (line " << e.line() << ")";
  }
  return tree;
}

}  // namespace

void ReadTrainConfigFile(const std::string &path, TrainConfig *config) {
  const pt::ptree tree = ParseIni(ReadFileToString(path), path);
  const auto &allowed = AllowedKeys().at("network");
  for (const auto &[key, node] : tree) {
    if (!node.empty())
      DSV_ERR(kInvalidConfig) << path << ": sections are not allowed in a train config";
    if (!allowed.count(key) || key == "train_config")
      DSV_ERR(kInvalidConfig) << path << ": unknown key '" << key << "'";
  }
  ApplyTrainKeys(tree, path, config);
  config->Validate();
}

ExperimentConfig ExperimentConfig::FromFile(const std::string &path) {
  const std::string base = fs::absolute(path).parent_path().string();
  return FromString(ReadFileToString(path), base);
}

ExperimentConfig ExperimentConfig::FromString(const std::string &text,
                                              const std::string &base_dir) {
  const pt::ptree tree = ParseIni(text, "config");
  for (const auto &[name, section] : tree) {
    auto it = AllowedKeys().find(name);
    if (it == AllowedKeys().end() || section.empty())
      DSV_ERR(kInvalidConfig) << "unknown section or top-level key '" << name << "'";
    for (const auto &[key, node] : section)
      if (!it->second.count(key))
        DSV_ERR(kInvalidConfig) << "unknown key '" << name << "." << key << "'";
  }
  auto section = [&](const char *name) {
    return tree.get_child(name, pt::ptree());
  };

  ExperimentConfig c;
  const pt::ptree general = section("general");
  uint64_t seed = 0;
  if (general.get_optional<std::string>("seed")) {
    Get(general, "general", "seed", &seed);
    c.seed = seed;
    c.train.seed = seed;
  }
  Get(general, "general", "jobs", &c.jobs);
  Get(general, "general", "verbose", &c.verbose);

  const pt::ptree paths = section("paths");
  Get(paths, "paths", "corpus", &c.corpus_dir);
  Get(paths, "paths", "output", &c.output_dir);
  c.corpus_dir = Resolve(base_dir, c.corpus_dir);
  c.output_dir = Resolve(base_dir, c.output_dir);
  if (const char *env = std::getenv("OUTPUT_DIR"); env && *env) c.output_dir = env;

  const pt::ptree corpus = section("corpus");
  Get(corpus, "corpus", "source", &c.source);
  if (c.source != "synthetic" && c.source != "rsr2015")
    DSV_ERR(kInvalidConfig) << "corpus.source must be synthetic or rsr2015";
  SynthSpec &s = c.synth;
  Get(corpus, "corpus", "speakers", &s.speakers);
  Get(corpus, "corpus", "train_speakers", &s.train_speakers);
  Get(corpus, "corpus", "phrases", &s.phrases);
  Get(corpus, "corpus", "sessions", &s.sessions);
  Get(corpus, "corpus", "enroll_sessions", &s.enroll_sessions);
  Get(corpus, "corpus", "channels", &s.channels);
  Get(corpus, "corpus", "segments", &s.segments);
  Get(corpus, "corpus", "min_segment_frames", &s.min_segment_frames);
  Get(corpus, "corpus", "max_segment_frames", &s.max_segment_frames);
  Get(corpus, "corpus", "template_scale", &s.template_scale);
  Get(corpus, "corpus", "speaker_scale", &s.speaker_scale);
  Get(corpus, "corpus", "session_scale", &s.session_scale);
  Get(corpus, "corpus", "noise_std", &s.noise_std);
  Get(corpus, "corpus", "rsr_root", &c.rsr_root);
  Get(corpus, "corpus", "rsr_train_speakers", &c.rsr_train_speakers);
  c.rsr_root = Resolve(base_dir, c.rsr_root);
  c.rsr_train_speakers = Resolve(base_dir, c.rsr_train_speakers);
  std::string v;
  Get(corpus, "corpus", "rsr_enroll_sessions", &v);
  if (!v.empty()) c.rsr_enroll_sessions = ParseIntSet("rsr_enroll_sessions", v);
  v.clear();
  Get(corpus, "corpus", "rsr_phrases", &v);
  if (!v.empty()) c.rsr_phrases = ParseIntSet("rsr_phrases", v);

  const pt::ptree feats = section("features");
  MfccConfig &m = c.mfcc;
  Get(feats, "features", "frame_length_ms", &m.frame_length_ms);
  Get(feats, "features", "frame_shift_ms", &m.frame_shift_ms);
  Get(feats, "features", "preemph_coeff", &m.preemph_coeff);
  Get(feats, "features", "num_mel_bins", &m.num_mel_bins);
  Get(feats, "features", "num_ceps", &m.num_ceps);
  Get(feats, "features", "low_freq", &m.low_freq);
  Get(feats, "features", "high_freq", &m.high_freq);
  Get(feats, "features", "energy_floor", &m.energy_floor);
  Get(feats, "features", "delta_width", &c.delta_width);
  Get(feats, "features", "cmvn", &c.cmvn);
  v.clear();
  Get(feats, "features", "length_norm", &v);
  if (!v.empty()) c.length_norm = ParseLengthNormMode(v);

  const pt::ptree hmm = section("hmm");
  Get(hmm, "hmm", "states", &c.hmm.num_states);
  Get(hmm, "hmm", "iters", &c.hmm.max_iters);
  Get(hmm, "hmm", "tol", &c.hmm.tol);
  Get(hmm, "hmm", "var_floor_factor", &c.hmm.var_floor_factor);
  Get(hmm, "hmm", "static_only", &c.hmm_static_only);
  if (c.hmm.num_states < 1 || c.hmm.max_iters < 0 || !(c.hmm.var_floor_factor > 0.0))
    DSV_ERR(kInvalidConfig) << "hmm: states >= 1, iters >= 0, var_floor_factor > 0";

  const pt::ptree net = section("network");
  ApplyTrainKeys(net, "network", &c.train);
  if (net.get_optional<std::string>("seed")) c.seed = c.train.seed;
  v.clear();
  Get(net, "network", "train_config", &v);
  if (!v.empty()) ReadTrainConfigFile(Resolve(base_dir, v), &c.train);
  c.train.jobs = c.jobs;
  c.train.Validate();

  const pt::ptree eval = section("evaluation");
  Get(eval, "evaluation", "trials", &c.trials_path);
  c.trials_path = Resolve(base_dir, c.trials_path);
  v.clear();
  Get(eval, "evaluation", "enroll_rule", &v);
  if (!v.empty()) c.enroll_rule = ParseEnrollRule(v);
  Get(eval, "evaluation", "pca", &c.pca);

  c.synth.Validate();
  if (c.jobs < 1) DSV_ERR(kInvalidConfig) << "general.jobs must be >= 1";
  return c;
}

uint64_t ExperimentConfig::Seed() const {
  if (!seed) {
    if (train.deterministic)
      DSV_ERR(kInvalidConfig) << "deterministic run requested but no seed configured "
                                 "(set general.seed or pass --seed)";
    return train.seed;
  }
  return *seed;
}

std::string ExperimentConfig::FeatureFingerprint(
    const std::string &corpus_fingerprint) const {
  const std::string canonical =
      fmt::format("corpus={};length_norm={};cmvn={};hmm_static_only={}",
                  corpus_fingerprint, LengthNormModeName(length_norm), cmvn,
                  hmm_static_only);
  return fmt::format("{:016x}", Fnv1a64(canonical));
}

std::string ExperimentConfig::CorpusManifestPath() const {
  return (fs::path(corpus_dir) / "manifest.tsv").string();
}

}  // namespace dsv
