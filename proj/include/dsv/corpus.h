// dsv/corpus.h

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

#ifndef DSV_CORPUS_H_
#define DSV_CORPUS_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dsv/feature-matrix.h"

namespace dsv {

enum class Partition { kTrain, kEnroll, kTest };

Partition ParsePartition(std::string_view s);
std::string_view PartitionName(Partition p);

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string phrase_id;
  Partition partition = Partition::kTrain;
  std::string path;  // relative to the manifest directory, or absolute
};

/// One line per utterance:
///   utterance_id \t speaker_id \t phrase_id \t partition \t relative_path
class CorpusManifest {
 public:
  CorpusManifest() = default;
  CorpusManifest(std::vector<ManifestEntry> entries, std::string root);

  const std::vector<ManifestEntry> &entries() const { return entries_; }
  const std::string &root() const { return root_; }
  void set_root(std::string root) { root_ = std::move(root); }

  void Add(ManifestEntry e);
  const ManifestEntry &Find(const std::string &utterance_id) const;
  bool Contains(const std::string &utterance_id) const;
  std::string ResolvePath(const ManifestEntry &e) const;

  std::vector<const ManifestEntry *> Select(Partition p) const;
  std::vector<std::string> PhraseIds() const;  // sorted, unique

  /// Throws Error(kIo) if any entry's file is missing.
  void CheckPaths() const;

  void Write(const std::string &path) const;
  /// Reads a manifest; the root becomes the manifest's directory.
  static CorpusManifest Read(const std::string &path);

 private:
  std::vector<ManifestEntry> entries_;
  std::map<std::string, size_t> index_;
  std::string root_;
};

struct SynthSpec {
  int speakers = 10;        // evaluation speakers (enroll + test sessions)
  int train_speakers = 0;   // background speakers (all sessions train)
  int phrases = 5;
  int sessions = 6;
  int enroll_sessions = 3;  // first sessions of each eval cell are enroll
  int channels = 20;
  int segments = 10;        // template segments per phrase
  int min_segment_frames = 4;
  int max_segment_frames = 9;
  double template_scale = 1.0;
  double speaker_scale = 1.0;
  double session_scale = 0.1;
  double noise_std = 0.3;

  void Validate() const;
};

/// Generator parameters, kept for tests that need ground truth.
struct SynthTruth {
  Matrix templates;                         // channels x segments
  std::vector<std::vector<int>> phrase_order;  // per phrase: template index per segment
  std::map<std::string, Vector> speaker_offset;
  std::map<std::string, std::vector<int>> segment_lengths;  // per utterance
};

struct SynthCorpus {
  CorpusManifest manifest;
  std::vector<FeatureMatrix> features;  // parallel to manifest.entries()
  SynthTruth truth;
};

/// Desk-scale stand-in for a text-dependent corpus.
///
/// Every phrase is a different ordering of one shared pool of segment
/// templates, so all phrases have nearly the same temporal mean and differ
/// only in temporal structure. Each frame is
///   template[phrase_order[p][k]] + speaker_offset[s] + session_offset + noise
/// with per-utterance random segment durations. Feature values are rounded to
/// float precision so files round-trip exactly.
SynthCorpus GenerateSynthCorpus(const SynthSpec &spec, uint64_t seed);

/// Writes features to <dir>/feats/<utt>.ftm and the manifest to
/// <dir>/manifest.tsv.
void WriteCorpus(const std::string &dir, const SynthCorpus &corpus);

/// Scans an RSR2015-style tree (<root>/**/<spk>_<session>_<phrase>.wav, e.g.
/// m001_02_013.wav). Speakers listed in `train_speakers` go to the train
/// partition; for the rest, sessions in `enroll_sessions` are enrollment and
/// all others test. Paths in the result are absolute.
CorpusManifest ScanRsr2015(const std::string &root,
                           const std::set<std::string> &train_speakers,
                           const std::set<int> &enroll_sessions,
                           const std::set<int> &phrases);

}  // namespace dsv

#endif  // DSV_CORPUS_H_
