// corpus.cc

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

#include "dsv/corpus.h"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <regex>

#include "dsv/error.h"
#include "dsv/io-util.h"
#include "dsv/rng.h"

namespace dsv {

namespace fs = std::filesystem;

Partition ParsePartition(std::string_view s) {
  if (s == "train") return Partition::kTrain;
  if (s == "enroll") return Partition::kEnroll;
  if (s == "test") return Partition::kTest;
  DSV_ERR(kFormat) << "unknown partition '" << s << "'";
}

std::string_view PartitionName(Partition p) {
  switch (p) {
    case Partition::kTrain: return "train";
    case Partition::kEnroll: return "enroll";
    case Partition::kTest: return "test";
  }
  return "train";
}

CorpusManifest::CorpusManifest(std::vector<ManifestEntry> entries,
                               std::string root)
    : root_(std::move(root)) {
  for (auto &e : entries) Add(std::move(e));
}

void CorpusManifest::Add(ManifestEntry e) {
  if (e.utterance_id.empty()) DSV_ERR(kFormat) << "empty utterance id";
  auto [it, inserted] = index_.emplace(e.utterance_id, entries_.size());
  if (!inserted) DSV_ERR(kFormat) << "duplicate utterance id " << e.utterance_id;
  entries_.push_back(std::move(e));
}

const ManifestEntry &CorpusManifest::Find(const std::string &utterance_id) const {
  auto it = index_.find(utterance_id);
  if (it == index_.end()) DSV_ERR(kUnknownId) << "utterance " << utterance_id;
  return entries_[it->second];
}

bool CorpusManifest::Contains(const std::string &utterance_id) const {
  return index_.count(utterance_id) != 0;
}

std::string CorpusManifest::ResolvePath(const ManifestEntry &e) const {
  fs::path p(e.path);
  if (p.is_absolute() || root_.empty()) return p.string();
  return (fs::path(root_) / p).string();
}

std::vector<const ManifestEntry *> CorpusManifest::Select(Partition p) const {
  std::vector<const ManifestEntry *> out;
  for (const auto &e : entries_)
    if (e.partition == p) out.push_back(&e);
  return out;
}

std::vector<std::string> CorpusManifest::PhraseIds() const {
  std::set<std::string> ids;
  for (const auto &e : entries_) ids.insert(e.phrase_id);
  return {ids.begin(), ids.end()};
}

void CorpusManifest::CheckPaths() const {
  for (const auto &e : entries_)
    if (!fs::exists(ResolvePath(e)))
      DSV_ERR(kIo) << "missing file for " << e.utterance_id << ": "
                   << ResolvePath(e);
}

void CorpusManifest::Write(const std::string &path) const {
  std::string out;
  for (const auto &e : entries_)
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", e.utterance_id, e.speaker_id,
                       e.phrase_id, PartitionName(e.partition), e.path);
  WriteStringToFile(path, out);
}

CorpusManifest CorpusManifest::Read(const std::string &path) {
  std::ifstream is = OpenInput(path);
  CorpusManifest m;
  m.root_ = fs::path(path).parent_path().string();
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    auto fields = SplitString(line, '\t');
    if (fields.size() != 5)
      DSV_ERR(kFormat) << path << ":" << line_no << ": expected 5 tab-separated fields";
    m.Add({fields[0], fields[1], fields[2], ParsePartition(fields[3]), fields[4]});
  }
  return m;
}

void SynthSpec::Validate() const {
  if (speakers + train_speakers <= 0 || phrases <= 0)
    DSV_ERR(kInvalidConfig) << "synthetic corpus needs at least one speaker and phrase";
  if (sessions <= 0 || channels <= 0 || segments <= 0)
    DSV_ERR(kInvalidConfig) << "sessions, channels and segments must be positive";
  if (enroll_sessions < 0 || enroll_sessions > sessions)
    DSV_ERR(kInvalidConfig) << "enroll_sessions must lie in [0, sessions]";
  if (min_segment_frames < 1 || max_segment_frames < min_segment_frames)
    DSV_ERR(kInvalidConfig) << "bad segment duration range";
  if (noise_std < 0.0 || speaker_scale < 0.0 || session_scale < 0.0 ||
      template_scale < 0.0)
    DSV_ERR(kInvalidConfig) << "scales must be non-negative";
}

SynthCorpus GenerateSynthCorpus(const SynthSpec &spec, uint64_t seed) {
  spec.Validate();
  Rng rng(seed);
  SynthCorpus out;
  SynthTruth &truth = out.truth;

  truth.templates.resize(spec.channels, spec.segments);
  for (int k = 0; k < spec.segments; ++k)
    for (int c = 0; c < spec.channels; ++c)
      truth.templates(c, k) = rng.Normal(0.0, spec.template_scale);

  truth.phrase_order.resize(spec.phrases);
  for (auto &order : truth.phrase_order) {
    order.resize(spec.segments);
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(&order);
  }

  struct SpeakerInfo {
    std::string id;
    bool train;
  };
  std::vector<SpeakerInfo> speakers;
  for (int s = 0; s < spec.train_speakers; ++s)
    speakers.push_back({fmt::format("b{:03d}", s + 1), true});
  for (int s = 0; s < spec.speakers; ++s)
    speakers.push_back({fmt::format("e{:03d}", s + 1), false});
  for (const auto &spk : speakers) {
    Vector offset(spec.channels);
    for (int c = 0; c < spec.channels; ++c) offset[c] = rng.Normal(0.0, spec.speaker_scale);
    truth.speaker_offset[spk.id] = std::move(offset);
  }

  for (const auto &spk : speakers) {
    const Vector &offset = truth.speaker_offset[spk.id];
    for (int p = 0; p < spec.phrases; ++p) {
      const std::string phrase_id = fmt::format("p{:02d}", p + 1);
      for (int sess = 0; sess < spec.sessions; ++sess) {
        Rng utt_rng(rng.NextSeed());
        const std::string utt_id =
            fmt::format("{}_{}_s{}", spk.id, phrase_id, sess + 1);
        std::vector<int> lengths(spec.segments);
        int total = 0;
        for (auto &len : lengths) {
          len = static_cast<int>(
              utt_rng.Int(spec.min_segment_frames, spec.max_segment_frames));
          total += len;
        }
        Vector session(spec.channels);
        for (int c = 0; c < spec.channels; ++c)
          session[c] = utt_rng.Normal(0.0, spec.session_scale);

        Matrix data(spec.channels, total);
        int t = 0;
        for (int k = 0; k < spec.segments; ++k) {
          const auto tmpl = truth.templates.col(truth.phrase_order[p][k]);
          for (int i = 0; i < lengths[k]; ++i, ++t)
            for (int c = 0; c < spec.channels; ++c)
              data(c, t) = static_cast<float>(tmpl[c] + offset[c] + session[c] +
                                              utt_rng.Normal(0.0, spec.noise_std));
        }

        Partition part = Partition::kTrain;
        if (!spk.train)
          part = sess < spec.enroll_sessions ? Partition::kEnroll : Partition::kTest;
        out.manifest.Add({utt_id, spk.id, phrase_id, part,
                          fmt::format("feats/{}.ftm", utt_id)});
        out.features.emplace_back(std::move(data), 10.0);
        truth.segment_lengths[utt_id] = std::move(lengths);
      }
    }
  }
  return out;
}

void WriteCorpus(const std::string &dir, const SynthCorpus &corpus) {
  const auto &entries = corpus.manifest.entries();
  DSV_CHECK(entries.size() == corpus.features.size(), kInvalidArgument);
  for (size_t i = 0; i < entries.size(); ++i)
    WriteFeatures((fs::path(dir) / entries[i].path).string(), corpus.features[i]);
  corpus.manifest.Write((fs::path(dir) / "manifest.tsv").string());
}

CorpusManifest ScanRsr2015(const std::string &root,
                           const std::set<std::string> &train_speakers,
                           const std::set<int> &enroll_sessions,
                           const std::set<int> &phrases) {
  if (!fs::is_directory(root)) DSV_ERR(kIo) << "not a directory: " << root;
  static const std::regex kName(R"(([mf]\d{3})_(\d{2})_(\d{3})\.wav)");
  std::vector<fs::path> files;
  for (const auto &de : fs::recursive_directory_iterator(root))
    if (de.is_regular_file()) files.push_back(de.path());
  std::sort(files.begin(), files.end());

  CorpusManifest m;
  for (const auto &file : files) {
    std::smatch match;
    const std::string name = file.filename().string();
    if (!std::regex_match(name, match, kName)) continue;
    const std::string speaker = match[1];
    const int session = std::stoi(match[2]);
    const int phrase = std::stoi(match[3]);
    if (!phrases.empty() && !phrases.count(phrase)) continue;
    Partition part = Partition::kTest;
    if (train_speakers.count(speaker))
      part = Partition::kTrain;
    else if (enroll_sessions.count(session))
      part = Partition::kEnroll;
    m.Add({name.substr(0, name.size() - 4), speaker, fmt::format("p{:03d}", phrase),
           part, fs::absolute(file).string()});
  }
  if (m.entries().empty()) DSV_ERR(kIo) << "no RSR2015 wav files under " << root;
  return m;
}

}  // namespace dsv
