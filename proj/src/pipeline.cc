// pipeline.cc

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

#include "dsv/pipeline.h"

#include <fmt/format.h>

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "dsv/alignment.h"
#include "dsv/error.h"
#include "dsv/feature-mfcc.h"
#include "dsv/io-util.h"
#include "dsv/nnet-train.h"
#include "dsv/rng.h"

namespace dsv {

namespace fs = std::filesystem;

void ParallelFor(int64_t n, int jobs, const std::function<void(int64_t)> &fn) {
  if (jobs <= 1 || n <= 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int64_t workers = std::min<int64_t>(jobs, n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  for (int64_t w = 0; w < workers; ++w)
    threads.emplace_back([&, w] {
      for (int64_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto &t : threads) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

std::string Out(const ExperimentConfig &c, const std::string &rel) {
  return (fs::path(c.output_dir) / rel).string();
}

const char *kCorpusInfoFile = "features.txt";

// Canonical description of how the corpus features are produced.
std::string CorpusDescription(const ExperimentConfig &c) {
  if (c.source == "rsr2015")
    return fmt::format("source=rsr2015;mfcc={};delta_width={}", c.mfcc.ToString(),
                       c.delta_width);
  return fmt::format("source=synthetic;channels={}", c.synth.channels);
}

std::string Tag(Architecture arch) { return std::string(ArchitectureTag(arch)); }

std::map<std::string, LeftRightHmm> LoadHmms(const ExperimentConfig &c,
                                             const CorpusManifest &m) {
  std::map<std::string, LeftRightHmm> hmms;
  for (const auto &phrase : m.PhraseIds()) {
    const std::string path = HmmPath(c, phrase);
    if (!fs::exists(path))
      DSV_ERR(kIo) << "missing phrase model " << path << " (run train-hmm first)";
    std::string stored;
    LeftRightHmm hmm = ReadHmm(path, &stored);
    if (stored != phrase) DSV_ERR(kFormat) << path << " holds phrase " << stored;
    hmms.emplace(phrase, std::move(hmm));
  }
  return hmms;
}

const LeftRightHmm &HmmFor(const std::map<std::string, LeftRightHmm> &hmms,
                           const std::string &phrase) {
  auto it = hmms.find(phrase);
  if (it == hmms.end()) DSV_ERR(kUnknownId) << "no phrase model for " << phrase;
  return it->second;
}

void WriteLines(const std::string &path, const std::vector<std::string> &lines) {
  std::string text;
  for (const auto &l : lines) text += l + "\n";
  WriteStringToFile(path, text);
}

}  // namespace

std::string HmmPath(const ExperimentConfig &c, const std::string &phrase_id) {
  return Out(c, "hmm/" + phrase_id + ".json");
}
std::string AlignmentsPath(const ExperimentConfig &c) {
  return Out(c, "align/alignments.txt");
}
std::string BundlePath(const ExperimentConfig &c, Architecture arch) {
  return Out(c, "model/" + Tag(arch) + ".json");
}
std::string TrainLogPath(const ExperimentConfig &c, Architecture arch) {
  return Out(c, "model/" + Tag(arch) + "_train.csv");
}
std::string ArchivePath(const ExperimentConfig &c, Architecture arch, Partition p) {
  return Out(c, "sv/" + Tag(arch) + "/" + std::string(PartitionName(p)) + ".svc");
}
std::string TrialsPath(const ExperimentConfig &c) {
  return c.trials_path.empty() ? Out(c, "trials.txt") : c.trials_path;
}
std::string ScoresPath(const ExperimentConfig &c, Architecture arch) {
  return Out(c, "scores/" + Tag(arch) + ".txt");
}
std::string EvalDir(const ExperimentConfig &c, Architecture arch) {
  return Out(c, "eval/" + Tag(arch));
}

LoadedCorpus LoadCorpus(const ExperimentConfig &c) {
  LoadedCorpus corpus;
  const std::string manifest_path = c.CorpusManifestPath();
  if (!fs::exists(manifest_path))
    DSV_ERR(kIo) << "missing corpus manifest " << manifest_path << " (run synth first)";
  corpus.manifest = CorpusManifest::Read(manifest_path);
  corpus.manifest.CheckPaths();

  const fs::path info = fs::path(c.corpus_dir) / kCorpusInfoFile;
  if (fs::exists(info)) {
    corpus.description = Trim(ReadFileToString(info.string()));
    const std::string expected = CorpusDescription(c);
    if (c.source == "rsr2015" && corpus.description != expected)
      DSV_ERR(kFingerprintMismatch)
          << "corpus features were produced with '" << corpus.description
          << "' but the configuration asks for '" << expected << "'; re-run synth";
  } else {
    corpus.description = "source=external";
  }

  const auto &entries = corpus.manifest.entries();
  corpus.features.resize(entries.size());
  ParallelFor(static_cast<int64_t>(entries.size()), c.jobs, [&](int64_t i) {
    FeatureMatrix f = ReadFeatures(corpus.manifest.ResolvePath(entries[i]));
    corpus.features[i] = c.cmvn ? MeanVarianceNormalize(f) : std::move(f);
  });
  return corpus;
}

FeatureMatrix PrepareInput(const FeatureMatrix &f, const LeftRightHmm &hmm,
                           LengthNormMode mode) {
  if (hmm.target_frames() <= 0)
    DSV_ERR(kFormat) << "phrase model has no target length";
  return NormalizeLength(f, hmm.target_frames(), mode);
}

FeatureMatrix HmmView(const FeatureMatrix &f, bool static_only) {
  if (!static_only) return f;
  if (f.ChannelCount() % 3 != 0)
    DSV_ERR(kDimensionMismatch) << "static-only alignment needs a channel count "
                                   "divisible by 3, got " << f.ChannelCount();
  return FeatureMatrix(f.data.topRows(f.ChannelCount() / 3), f.frame_shift_ms);
}

StateSequence AlignUtterance(const FeatureMatrix &prepared, const LeftRightHmm &hmm,
                             bool static_only) {
  StateSequence s = Viterbi(hmm, HmmView(prepared, static_only));
  s.Validate(hmm.NumStates());
  return s;
}

Vector ExtractEmbedding(const ModelBundle &bundle, const FeatureMatrix &f,
                        const std::string &phrase_id) {
  const LeftRightHmm &hmm = HmmFor(bundle.hmms, phrase_id);
  const FeatureMatrix x = PrepareInput(f, hmm, bundle.length_norm);
  const StateSequence path = AlignUtterance(x, hmm, bundle.hmm_static_only);
  return bundle.network.Embed(x.data, ExpandAlignment(path, hmm.NumStates()));
}

void CmdSynth(const ExperimentConfig &c, std::ostream &log) {
  const fs::path dir(c.corpus_dir);
  if (c.source == "synthetic") {
    const SynthCorpus corpus = GenerateSynthCorpus(c.synth, c.Seed());
    WriteCorpus(c.corpus_dir, corpus);
    log << fmt::format("synth: wrote {} utterances to {}\n",
                       corpus.manifest.entries().size(), c.corpus_dir);
  } else {
    if (c.rsr_root.empty()) DSV_ERR(kInvalidConfig) << "corpus.rsr_root is not set";
    std::set<std::string> train;
    if (!c.rsr_train_speakers.empty())
      for (const auto &line : SplitString(ReadFileToString(c.rsr_train_speakers), '\n'))
        if (!Trim(line).empty()) train.insert(Trim(line));
    const CorpusManifest wavs =
        ScanRsr2015(c.rsr_root, train, c.rsr_enroll_sessions, c.rsr_phrases);
    const auto &entries = wavs.entries();
    CorpusManifest out;
    for (const auto &e : entries) {
      ManifestEntry copy = e;
      copy.path = "feats/" + e.utterance_id + ".ftm";
      out.Add(copy);
    }
    ParallelFor(static_cast<int64_t>(entries.size()), c.jobs, [&](int64_t i) {
      const FeatureMatrix mfcc = ComputeMfcc(ReadWav(entries[i].path), c.mfcc);
      WriteFeatures((dir / out.entries()[i].path).string(),
                    AppendDeltas(mfcc, c.delta_width));
    });
    out.Write((dir / "manifest.tsv").string());
    log << fmt::format("synth: computed features for {} RSR2015 files\n", entries.size());
  }
  WriteStringToFile((dir / kCorpusInfoFile).string(), CorpusDescription(c) + "\n");
}

void CmdTrainHmm(const ExperimentConfig &c, std::ostream &log) {
  const LoadedCorpus corpus = LoadCorpus(c);
  const auto &entries = corpus.manifest.entries();
  const std::vector<std::string> phrases = corpus.manifest.PhraseIds();
  std::vector<std::string> messages(phrases.size());
  ParallelFor(static_cast<int64_t>(phrases.size()), c.jobs, [&](int64_t p) {
    std::vector<const FeatureMatrix *> raw;
    int64_t target = 0;
    for (size_t i = 0; i < entries.size(); ++i)
      if (entries[i].phrase_id == phrases[p] && entries[i].partition == Partition::kTrain) {
        raw.push_back(&corpus.features[i]);
        target = std::max(target, corpus.features[i].FrameCount());
      }
    if (raw.empty())
      DSV_ERR(kInvalidArgument) << "phrase " << phrases[p] << " has no training utterances";
    std::vector<FeatureMatrix> utts;
    for (const FeatureMatrix *f : raw)
      utts.push_back(HmmView(NormalizeLength(*f, target, c.length_norm), c.hmm_static_only));
    const LeftRightHmm init =
        InitUniformSegmentation(utts, c.hmm.num_states, c.hmm.var_floor_factor);
    HmmTrainResult result = TrainSegmental(init, utts, c.hmm.max_iters, c.hmm.tol);
    result.hmm.set_target_frames(target);
    WriteHmm(HmmPath(c, phrases[p]), result.hmm, phrases[p]);
    std::vector<std::string> rows = {"iteration,log_likelihood"};
    for (size_t k = 0; k < result.log_likelihood.size(); ++k)
      rows.push_back(fmt::format("{},{:.10g}", k, result.log_likelihood[k]));
    WriteLines(Out(c, "hmm/" + phrases[p] + "_loglik.csv"), rows);
    messages[p] = fmt::format("train-hmm: {} utts={} T={} iters={} loglik={:.4f}\n",
                              phrases[p], utts.size(), target, result.iterations,
                              result.log_likelihood.back());
  });
  for (const auto &m : messages) log << m;
}

void CmdAlign(const ExperimentConfig &c, std::ostream &log) {
  const LoadedCorpus corpus = LoadCorpus(c);
  const auto hmms = LoadHmms(c, corpus.manifest);
  const auto &entries = corpus.manifest.entries();
  std::vector<std::string> lines(entries.size());
  ParallelFor(static_cast<int64_t>(entries.size()), c.jobs, [&](int64_t i) {
    const LeftRightHmm &hmm = HmmFor(hmms, entries[i].phrase_id);
    const StateSequence s = AlignUtterance(
        PrepareInput(corpus.features[i], hmm, c.length_norm), hmm, c.hmm_static_only);
    std::string line = entries[i].utterance_id;
    for (int32_t q : s.states) line += fmt::format(" {}", q + 1);
    lines[i] = std::move(line);
  });
  WriteLines(AlignmentsPath(c), lines);
  log << fmt::format("align: wrote {} state sequences to {}\n", lines.size(),
                     AlignmentsPath(c));
}

void CmdTrainDnn(const ExperimentConfig &c, std::ostream &log) {
  const LoadedCorpus corpus = LoadCorpus(c);
  const auto hmms = LoadHmms(c, corpus.manifest);
  const auto &entries = corpus.manifest.entries();
  const Architecture arch = c.train.architecture;

  std::set<ModelId> classes;
  std::vector<size_t> train_idx;
  for (size_t i = 0; i < entries.size(); ++i)
    if (entries[i].partition == Partition::kTrain) {
      classes.insert({entries[i].speaker_id, entries[i].phrase_id});
      train_idx.push_back(i);
    }
  if (train_idx.empty()) DSV_ERR(kInvalidArgument) << "corpus has no training utterances";

  ModelBundle bundle;
  bundle.class_map.assign(classes.begin(), classes.end());
  bundle.hmms = hmms;
  bundle.length_norm = c.length_norm;
  bundle.cmvn = c.cmvn;
  bundle.hmm_static_only = c.hmm_static_only;
  bundle.fingerprint = c.FeatureFingerprint(corpus.description);

  const int64_t input_dim = corpus.features[train_idx[0]].ChannelCount();
  bundle.network = Network(NetworkConfig::ForArchitecture(
      arch, input_dim, c.train.width, c.hmm.num_states,
      static_cast<int64_t>(classes.size())));
  Rng init_rng(c.Seed());
  bundle.network.InitRandom(&init_rng);

  std::vector<std::string> csv = {"epoch,loss,accuracy,wall_seconds"};
  if (arch != Architecture::kSignal_align) {
    std::vector<Matrix> inputs(train_idx.size());
    std::vector<TrainingExample> examples(train_idx.size());
    ParallelFor(static_cast<int64_t>(train_idx.size()), c.jobs, [&](int64_t k) {
      const ManifestEntry &e = entries[train_idx[k]];
      const LeftRightHmm &hmm = HmmFor(hmms, e.phrase_id);
      const FeatureMatrix x =
          PrepareInput(corpus.features[train_idx[k]], hmm, c.length_norm);
      examples[k].alignment =
          ExpandAlignment(AlignUtterance(x, hmm, c.hmm_static_only), hmm.NumStates());
      inputs[k] = x.data;
    });
    for (size_t k = 0; k < train_idx.size(); ++k) {
      const ManifestEntry &e = entries[train_idx[k]];
      examples[k].features = &inputs[k];
      examples[k].label = std::distance(
          bundle.class_map.begin(),
          std::lower_bound(bundle.class_map.begin(), bundle.class_map.end(),
                           ModelId{e.speaker_id, e.phrase_id}));
    }
    TrainConfig tc = c.train;
    tc.seed = c.Seed();
    tc.jobs = c.jobs;
    TrainNetwork(&bundle.network, examples, tc, [&](const EpochStats &s) {
      csv.push_back(fmt::format("{},{:.6f},{:.6f},{:.3f}", s.epoch, s.loss, s.accuracy,
                                s.wall_seconds));
      if (c.verbose > 0)
        log << fmt::format("train-dnn: {} epoch {} loss={:.4f} acc={:.4f}\n", Tag(arch),
                           s.epoch, s.loss, s.accuracy);
    });
  }
  WriteBundle(BundlePath(c, arch), bundle);
  WriteLines(TrainLogPath(c, arch), csv);
  log << fmt::format("train-dnn: {} classes={} examples={} -> {}\n", Tag(arch),
                     classes.size(), train_idx.size(), BundlePath(c, arch));
}

void CmdExtract(const ExperimentConfig &c, std::ostream &log) {
  const Architecture arch = c.train.architecture;
  const std::string bundle_path = BundlePath(c, arch);
  if (!fs::exists(bundle_path))
    DSV_ERR(kIo) << "missing model " << bundle_path << " (run train-dnn first)";
  const ModelBundle bundle = ReadBundle(bundle_path);
  const LoadedCorpus corpus = LoadCorpus(c);
  bundle.CheckFingerprint(c.FeatureFingerprint(corpus.description));
  const auto &entries = corpus.manifest.entries();
  const int64_t channels = bundle.network.config().EmbeddingChannels();
  for (Partition part : {Partition::kEnroll, Partition::kTest}) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < entries.size(); ++i)
      if (entries[i].partition == part) idx.push_back(i);
    std::vector<Vector> vecs(idx.size());
    ParallelFor(static_cast<int64_t>(idx.size()), c.jobs, [&](int64_t k) {
      vecs[k] = ExtractEmbedding(bundle, corpus.features[idx[k]], entries[idx[k]].phrase_id);
    });
    SupervectorArchive archive;
    for (size_t k = 0; k < idx.size(); ++k)
      archive.Add(entries[idx[k]].utterance_id, std::move(vecs[k]), channels);
    archive.Write(ArchivePath(c, arch, part));
    log << fmt::format("extract: {} {} vectors -> {}\n", idx.size(), PartitionName(part),
                       ArchivePath(c, arch, part));
  }
}

void CmdScore(const ExperimentConfig &c, std::ostream &log) {
  const Architecture arch = c.train.architecture;
  const CorpusManifest manifest = CorpusManifest::Read(c.CorpusManifestPath());
  std::vector<TrialRecord> trials;
  if (c.trials_path.empty()) {
    trials = GenerateTrials(manifest);
    WriteTrials(TrialsPath(c), trials);
  } else {
    trials = ReadTrials(c.trials_path);
  }
  const SupervectorArchive enroll =
      SupervectorArchive::Read(ArchivePath(c, arch, Partition::kEnroll));
  const SupervectorArchive test =
      SupervectorArchive::Read(ArchivePath(c, arch, Partition::kTest));
  EnrollmentSet models;
  for (const auto &id : enroll.ids()) {
    const ManifestEntry &e = manifest.Find(id);
    models[{e.speaker_id, e.phrase_id}].push_back(enroll.Get(id));
  }
  std::map<std::string, Vector> tests;
  for (const auto &id : test.ids()) tests.emplace(id, test.Get(id));
  const ScoreSet scores = ScoreTrials(models, tests, trials, c.enroll_rule);
  WriteScores(ScoresPath(c, arch), scores);
  log << fmt::format("score: {} trials -> {}\n", scores.size(), ScoresPath(c, arch));
}

EerResult CmdEval(const ExperimentConfig &c, std::ostream &out, std::ostream &log,
                  const std::string &scores_path) {
  const Architecture arch = c.train.architecture;
  const std::string path = scores_path.empty() ? ScoresPath(c, arch) : scores_path;
  const ScoreSet scores = ReadScores(path);
  const EerResult eer = ComputeEer(scores);
  const std::string report = FormatEerReport(eer);
  const fs::path dir(EvalDir(c, arch));
  WriteStringToFile((dir / "eer.txt").string(), report + "\n");

  std::vector<std::string> breakdown = {"pooled " + report};
  for (TrialLabel kind : {TrialLabel::kImpostor, TrialLabel::kWrongPhrase}) {
    ScoreSet subset;
    for (const auto &s : scores)
      if (s.trial.label == TrialLabel::kTarget || s.trial.label == kind) subset.push_back(s);
    const bool has_target = std::any_of(subset.begin(), subset.end(), [](const auto &s) {
      return s.trial.label == TrialLabel::kTarget;
    });
    if (has_target && subset.size() > 0 &&
        std::any_of(subset.begin(), subset.end(),
                    [&](const auto &s) { return s.trial.label == kind; }))
      breakdown.push_back(std::string(TrialLabelName(kind)) + " " +
                          FormatEerReport(ComputeEer(subset)));
  }
  WriteLines((dir / "breakdown.txt").string(), breakdown);

  std::vector<std::string> det = {"threshold,far,frr"};
  for (const auto &p : DetPoints(scores))
    det.push_back(fmt::format("{:.6f},{:.6f},{:.6f}", p.threshold, p.far, p.frr));
  WriteLines((dir / "det.csv").string(), det);

  const std::string test_archive = ArchivePath(c, arch, Partition::kTest);
  if (c.pca && scores_path.empty() && fs::exists(test_archive) &&
      fs::exists(c.CorpusManifestPath())) {
    const CorpusManifest manifest = CorpusManifest::Read(c.CorpusManifestPath());
    const SupervectorArchive test = SupervectorArchive::Read(test_archive);
    std::vector<Vector> vecs;
    for (const auto &id : test.ids()) vecs.push_back(test.Get(id));
    if (vecs.size() >= 2) {
      const PcaResult pca = Pca(vecs, 2);
      std::vector<ProjectedPoint> points;
      for (size_t i = 0; i < vecs.size(); ++i) {
        const ManifestEntry &e = manifest.Find(test.ids()[i]);
        points.push_back({e.utterance_id, e.speaker_id, e.phrase_id,
                          pca.coords(static_cast<Eigen::Index>(i), 0),
                          pca.coords(static_cast<Eigen::Index>(i), 1)});
      }
      WriteProjectionCsv((dir / "pca.csv").string(), points);
      WriteStringToFile((dir / "pca_speaker.svg").string(), ProjectionSvg(points, true));
      WriteStringToFile((dir / "pca_phrase.svg").string(), ProjectionSvg(points, false));
    }
  }
  out << report << "\n";
  log << fmt::format("eval: {} -> {}\n", path, dir.string());
  return eer;
}

double CmdGradcheck(const ExperimentConfig &c, std::ostream &out) {
  constexpr int64_t kChannels = 3, kFrames = 10, kClasses = 3, kWidth = 4;
  constexpr int32_t kStates = 2;
  Rng rng(c.seed.value_or(1));
  double worst = 0.0;
  for (Architecture arch :
       {Architecture::kFE3C_mean, Architecture::kSignal_align,
        Architecture::kFE1C_k1_align, Architecture::kFE1C_k3_align,
        Architecture::kFE3C_k3_align}) {
    Network net(
        NetworkConfig::ForArchitecture(arch, kChannels, kWidth, kStates, kClasses));
    net.InitRandom(&rng, 1.0);
    Matrix x(kChannels, kFrames);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.Normal();
    StateSequence path;
    const int64_t split = rng.Int(1, kFrames - 1);
    for (int64_t t = 0; t < kFrames; ++t) path.states.push_back(t < split ? 0 : 1);
    const int64_t label = rng.Index(kClasses);
    const GradCheckReport r =
        GradCheckNetwork(net, x, ExpandAlignment(path, kStates), label, 1e-5);
    worst = std::max(worst, r.max_relative_error);
    out << fmt::format("{} max_relative_error={:.3e} coordinates={}\n", Tag(arch),
                       r.max_relative_error, r.coordinates_checked);
  }
  out << fmt::format("max_relative_error={:.3e}\n", worst);
  return worst;
}

}  // namespace dsv
