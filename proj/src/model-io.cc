// model-io.cc

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

#include "dsv/model-io.h"

#include <json.hpp>

#include "dsv/error.h"
#include "dsv/io-util.h"

namespace dsv {

using json = nlohmann::json;

namespace {

constexpr const char *kHmmFormat = "dsv-hmm";
constexpr const char *kBundleFormat = "dsv-model-bundle";

json MatrixToJson(const Matrix &m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix MatrixFromJson(const json &j, int64_t rows, int64_t cols, const char *what) {
  if (j.at("rows").get<int64_t>() != rows || j.at("cols").get<int64_t>() != cols)
    DSV_ERR(kFormat) << what << ": expected " << rows << "x" << cols << ", got "
                     << j.at("rows") << "x" << j.at("cols");
  const json &data = j.at("data");
  if (!data.is_array() || static_cast<int64_t>(data.size()) != rows * cols)
    DSV_ERR(kFormat) << what << ": data has " << data.size() << " values";
  Matrix m(rows, cols);
  size_t i = 0;
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  return m;
}

json VectorToJson(const Vector &v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector VectorFromJson(const json &j, int64_t size, const char *what) {
  if (!j.is_array() || static_cast<int64_t>(j.size()) != size)
    DSV_ERR(kFormat) << what << ": expected " << size << " values";
  Vector v(size);
  for (int64_t i = 0; i < size; ++i) v[i] = j[i].get<double>();
  return v;
}

void CheckHeader(const json &j, const char *format, int version) {
  if (!j.is_object() || !j.contains("format") || j["format"] != format)
    DSV_ERR(kVersionMismatch) << "not a " << format << " document";
  const int v = j.at("version").get<int>();
  if (v != version)
    DSV_ERR(kVersionMismatch) << format << " version " << v << " (supported: " << version
                              << ")";
}

json HmmToJson(const LeftRightHmm &hmm, const std::string &phrase_id) {
  json states = json::array();
  for (int32_t q = 0; q < hmm.NumStates(); ++q)
    states.push_back({{"mean", VectorToJson(hmm.means().col(q))},
                      {"var", VectorToJson(hmm.variances().col(q))},
                      {"log_self", hmm.log_self()[q]},
                      {"log_adv", hmm.log_adv()[q]}});
  return json{{"format", kHmmFormat},
              {"version", kHmmFormatVersion},
              {"phrase", phrase_id},
              {"num_states", hmm.NumStates()},
              {"dim", hmm.Dim()},
              {"target_frames", hmm.target_frames()},
              {"var_floor", VectorToJson(hmm.var_floor())},
              {"states", std::move(states)}};
}

LeftRightHmm HmmFromJson(const json &j, std::string *phrase_id) {
  CheckHeader(j, kHmmFormat, kHmmFormatVersion);
  const int32_t num_states = j.at("num_states").get<int32_t>();
  const int32_t dim = j.at("dim").get<int32_t>();
  if (num_states < 1 || dim < 1) DSV_ERR(kFormat) << "hmm: bad num_states or dim";
  const json &states = j.at("states");
  if (!states.is_array() || static_cast<int32_t>(states.size()) != num_states)
    DSV_ERR(kFormat) << "hmm: expected " << num_states << " states";
  const Vector floor = VectorFromJson(j.at("var_floor"), dim, "hmm var_floor");
  if (!(floor.minCoeff() > 0.0)) DSV_ERR(kFormat) << "hmm: variance floor must be positive";
  Matrix means(dim, num_states), vars(dim, num_states);
  for (int32_t q = 0; q < num_states; ++q) {
    means.col(q) = VectorFromJson(states[q].at("mean"), dim, "hmm mean");
    vars.col(q) = VectorFromJson(states[q].at("var"), dim, "hmm var");
    if ((vars.col(q).array() < floor.array()).any())
      DSV_ERR(kFormat) << "hmm: state " << q + 1 << " variance below floor";
  }
  LeftRightHmm hmm(means, vars, floor, Vector::Constant(num_states, 0.5));
  try {
    for (int32_t q = 0; q < num_states; ++q)
      hmm.SetLogTransitions(q, states[q].at("log_self").get<double>(),
                            states[q].at("log_adv").get<double>());
  } catch (const Error &e) {
    DSV_ERR(kFormat) << "hmm: " << e.what();
  }
  hmm.set_target_frames(j.at("target_frames").get<int64_t>());
  if (phrase_id) *phrase_id = j.at("phrase").get<std::string>();
  return hmm;
}

json Parse(const std::string &text, const char *what) {
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    DSV_ERR(kFormat) << what << ": " << e.what();
  }
}

template <typename Fn>
auto Guard(const char *what, Fn fn) {
  try {
    return fn();
  } catch (const json::exception &e) {
    DSV_ERR(kFormat) << what << ": " << e.what();
  }
}

}  // namespace

std::string HmmToString(const LeftRightHmm &hmm, const std::string &phrase_id) {
  return HmmToJson(hmm, phrase_id).dump(1) + "\n";
}

LeftRightHmm HmmFromString(const std::string &text, std::string *phrase_id) {
  const json j = Parse(text, "hmm");
  return Guard("hmm", [&] { return HmmFromJson(j, phrase_id); });
}

void WriteHmm(const std::string &path, const LeftRightHmm &hmm,
              const std::string &phrase_id) {
  WriteStringToFile(path, HmmToString(hmm, phrase_id));
}

LeftRightHmm ReadHmm(const std::string &path, std::string *phrase_id) {
  return HmmFromString(ReadFileToString(path), phrase_id);
}

void ModelBundle::CheckFingerprint(const std::string &expected) const {
  if (fingerprint != expected)
    DSV_ERR(kFingerprintMismatch)
        << "model was trained on features with fingerprint " << fingerprint
        << " but the current configuration gives " << expected;
}

std::string BundleToString(const ModelBundle &b) {
  const NetworkConfig &c = b.network.config();
  json layers = json::array();
  for (const auto &layer : b.network.layers()) {
    json taps = json::array();
    for (int k = 0; k < layer.Kernel(); ++k) taps.push_back(MatrixToJson(layer.weight(k)));
    layers.push_back({{"in", layer.InChannels()},
                      {"out", layer.OutChannels()},
                      {"kernel", layer.Kernel()},
                      {"weight", std::move(taps)},
                      {"bias", MatrixToJson(layer.bias())}});
  }
  json net = {{"input_dim", c.input_dim},
              {"widths", c.widths},
              {"kernels", c.kernels},
              {"head", c.head == PoolingHead::kMean ? "mean" : "align"},
              {"num_states", c.num_states},
              {"num_classes", c.num_classes},
              {"layers", std::move(layers)},
              {"classifier",
               {{"weight", MatrixToJson(b.network.classifier().weight())},
                {"bias", MatrixToJson(b.network.classifier().bias())}}}};
  json classes = json::array();
  for (const auto &m : b.class_map)
    classes.push_back({{"speaker", m.speaker_id}, {"phrase", m.phrase_id}});
  json hmms = json::object();
  for (const auto &[phrase, hmm] : b.hmms) hmms[phrase] = HmmToJson(hmm, phrase);
  json j = {{"format", kBundleFormat},
            {"version", kBundleFormatVersion},
            {"architecture", std::string(ArchitectureTag(c.architecture))},
            {"fingerprint", b.fingerprint},
            {"features",
             {{"length_norm", std::string(LengthNormModeName(b.length_norm))},
              {"cmvn", b.cmvn},
              {"hmm_static_only", b.hmm_static_only}}},
            {"network", std::move(net)},
            {"class_map", std::move(classes)},
            {"hmms", std::move(hmms)}};
  return j.dump(1) + "\n";
}

ModelBundle BundleFromString(const std::string &text) {
  const json j = Parse(text, "model bundle");
  return Guard("model bundle", [&] {
    CheckHeader(j, kBundleFormat, kBundleFormatVersion);
    ModelBundle b;
    b.fingerprint = j.at("fingerprint").get<std::string>();
    const json &f = j.at("features");
    b.length_norm = ParseLengthNormMode(f.at("length_norm").get<std::string>());
    b.cmvn = f.at("cmvn").get<bool>();
    b.hmm_static_only = f.at("hmm_static_only").get<bool>();

    const json &n = j.at("network");
    NetworkConfig c;
    c.architecture = ParseArchitecture(j.at("architecture").get<std::string>());
    c.input_dim = n.at("input_dim").get<int64_t>();
    c.widths = n.at("widths").get<std::vector<int64_t>>();
    c.kernels = n.at("kernels").get<std::vector<int>>();
    const std::string head = n.at("head").get<std::string>();
    if (head != "mean" && head != "align") DSV_ERR(kFormat) << "unknown head " << head;
    c.head = head == "mean" ? PoolingHead::kMean : PoolingHead::kAlign;
    c.num_states = n.at("num_states").get<int32_t>();
    c.num_classes = n.at("num_classes").get<int64_t>();
    try {
      c.Validate();
    } catch (const Error &e) {
      DSV_ERR(kFormat) << "network config: " << e.what();
    }
    b.network = Network(c);

    const json &layers = n.at("layers");
    if (!layers.is_array() || layers.size() != c.widths.size())
      DSV_ERR(kFormat) << "expected " << c.widths.size() << " conv layers";
    for (size_t i = 0; i < layers.size(); ++i) {
      Conv1dLayer &layer = b.network.layers()[i];
      const json &l = layers[i];
      if (l.at("in").get<int64_t>() != layer.InChannels() ||
          l.at("out").get<int64_t>() != layer.OutChannels() ||
          l.at("kernel").get<int>() != layer.Kernel())
        DSV_ERR(kFormat) << "layer " << i << ": shape disagrees with the network config";
      const json &taps = l.at("weight");
      if (!taps.is_array() || static_cast<int>(taps.size()) != layer.Kernel())
        DSV_ERR(kFormat) << "layer " << i << ": expected " << layer.Kernel() << " taps";
      for (int k = 0; k < layer.Kernel(); ++k)
        layer.weight(k) = MatrixFromJson(taps[k], layer.OutChannels(),
                                         layer.InChannels(), "conv weight");
      layer.bias() = MatrixFromJson(l.at("bias"), layer.OutChannels(), 1, "conv bias");
    }
    AffineLayer &cls = b.network.classifier();
    const json &cj = n.at("classifier");
    cls.weight() = MatrixFromJson(cj.at("weight"), c.num_classes, c.EmbeddingDim(),
                                  "classifier weight");
    cls.bias() = MatrixFromJson(cj.at("bias"), c.num_classes, 1, "classifier bias");

    for (const auto &m : j.at("class_map"))
      b.class_map.push_back(
          {m.at("speaker").get<std::string>(), m.at("phrase").get<std::string>()});
    if (static_cast<int64_t>(b.class_map.size()) != c.num_classes)
      DSV_ERR(kFormat) << "class map has " << b.class_map.size() << " entries for "
                       << c.num_classes << " classes";

    for (const auto &[phrase, doc] : j.at("hmms").items()) {
      std::string inner;
      LeftRightHmm hmm = HmmFromJson(doc, &inner);
      if (inner != phrase) DSV_ERR(kFormat) << "hmm keyed " << phrase << " is for " << inner;
      if (c.head == PoolingHead::kAlign && hmm.NumStates() != c.num_states)
        DSV_ERR(kFormat) << "hmm " << phrase << " has " << hmm.NumStates()
                         << " states, network expects " << c.num_states;
      b.hmms.emplace(phrase, std::move(hmm));
    }
    return b;
  });
}

void WriteBundle(const std::string &path, const ModelBundle &bundle) {
  WriteStringToFile(path, BundleToString(bundle));
}

ModelBundle ReadBundle(const std::string &path) {
  return BundleFromString(ReadFileToString(path));
}

}  // namespace dsv
