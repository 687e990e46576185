#pragma once

// Classifier zoo behind one interface: config, train, predict, and a text
// container for persistence. Scores are "higher = more malicious" for every
// kind. Doubles are stored as hexfloats so a load/save round trip preserves
// predictions bit for bit.

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "spoofbench/boosted_trees.hpp"
#include "spoofbench/dataset.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/linear_svm.hpp"
#include "spoofbench/neural_net.hpp"
#include "spoofbench/random_forest.hpp"

namespace spoofbench {

enum class ModelKind : std::uint8_t { kLsvm, kGbt, kRf, kNn };

inline std::string kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kLsvm: return "lsvm";
    case ModelKind::kGbt: return "gbt";
    case ModelKind::kRf: return "rf";
    case ModelKind::kNn: return "nn";
  }
  return "?";
}

inline ModelKind kind_from_name(const std::string& s) {
  if (s == "lsvm") return ModelKind::kLsvm;
  if (s == "gbt") return ModelKind::kGbt;
  if (s == "rf") return ModelKind::kRf;
  if (s == "nn") return ModelKind::kNn;
  throw ConfigError("unknown model kind: " + s);
}

struct ModelConfig {
  ModelKind kind = ModelKind::kLsvm;
  LsvmConfig lsvm;
  GbtConfig gbt;
  RfConfig rf;
  NnConfig nn;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  ModelKind kind = ModelKind::kLsvm;
  std::uint32_t input_dim = 0;
  std::variant<LsvmModel, GbtModel, RfModel, NnModel> impl;
};

inline DenseMatrix densify(const FeatureMatrix& X) {
  DenseMatrix out;
  out.reserve(X.rows.size());
  for (const auto& r : X.rows) out.push_back(to_dense(r, X.cols));
  return out;
}

inline TrainedModel train(const ModelConfig& cfg, const Dataset& ds) {
  ds.check();
  if (ds.size() == 0) throw TrainError("empty dataset");
  {
    std::size_t pos = 0;
    for (int yi : ds.y) pos += yi;
    if (pos == 0 || pos == ds.size()) throw TrainError("single-class dataset");
  }
  TrainedModel m;
  m.kind = cfg.kind;
  m.input_dim = ds.X.cols;
  switch (cfg.kind) {
    case ModelKind::kLsvm: m.impl = train_lsvm(cfg.lsvm, ds, cfg.seed); break;
    case ModelKind::kGbt: m.impl = train_gbt(cfg.gbt, ds); break;
    case ModelKind::kRf: m.impl = train_rf(cfg.rf, ds, cfg.seed); break;
    case ModelKind::kNn:
      m.impl = train_nn(cfg.nn, densify(ds.X), ds.y, cfg.seed);
      break;
  }
  return m;
}

inline std::vector<double> predict(const TrainedModel& m, const FeatureMatrix& X) {
  if (X.cols != m.input_dim)
    throw ShapeError("feature dim " + std::to_string(X.cols) + " != model input dim " +
                     std::to_string(m.input_dim));
  std::vector<double> scores;
  scores.reserve(X.rows.size());
  for (const auto& row : X.rows) {
    double s = 0.0;
    if (const auto* lsvm = std::get_if<LsvmModel>(&m.impl)) s = lsvm->score(row);
    else if (const auto* gbt = std::get_if<GbtModel>(&m.impl)) s = gbt->score(row);
    else if (const auto* rf = std::get_if<RfModel>(&m.impl)) s = rf->score(row);
    else s = std::get<NnModel>(m.impl).score(to_dense(row, X.cols));
    scores.push_back(s);
  }
  return scores;
}

// Last-hidden-layer representation; defined for the nn kind only.
inline DenseMatrix nn_penultimate(const TrainedModel& m, const FeatureMatrix& X) {
  if (m.kind != ModelKind::kNn)
    throw KindError("penultimate activations need an nn model, got " + kind_name(m.kind));
  if (X.cols != m.input_dim) throw ShapeError("feature dim mismatch");
  const auto& nn = std::get<NnModel>(m.impl);
  DenseMatrix out;
  out.reserve(X.rows.size());
  for (const auto& row : X.rows) out.push_back(nn.penultimate(to_dense(row, X.cols)));
  return out;
}

// ---- text container --------------------------------------------------------

namespace detail {

inline std::string dtoa_hex(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

inline double atod_hex(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

inline void put_doubles(std::ostringstream& out, const std::vector<double>& v) {
  out << v.size();
  for (double x : v) out << " " << dtoa_hex(x);
  out << "\n";
}

inline std::vector<double> get_doubles(std::istringstream& in) {
  std::size_t n;
  in >> n;
  std::vector<double> v(n);
  for (auto& x : v) {
    std::string tok;
    in >> tok;
    x = atod_hex(tok);
  }
  return v;
}

inline void put_tree(std::ostringstream& out, const Tree& t) {
  out << t.nodes.size() << "\n";
  for (const auto& n : t.nodes)
    out << n.feature << " " << dtoa_hex(n.threshold) << " " << n.left << " " << n.right
        << " " << dtoa_hex(n.value) << "\n";
}

inline Tree get_tree(std::istringstream& in) {
  std::size_t n;
  in >> n;
  Tree t;
  t.nodes.resize(n);
  for (auto& node : t.nodes) {
    std::string thr, val;
    in >> node.feature >> thr >> node.left >> node.right >> val;
    node.threshold = atod_hex(thr);
    node.value = atod_hex(val);
  }
  return t;
}

}  // namespace detail

inline std::string save_model(const TrainedModel& m) {
  std::ostringstream out;
  out << "SBMODEL1 " << kind_name(m.kind) << " " << m.input_dim << "\n";
  if (const auto* lsvm = std::get_if<LsvmModel>(&m.impl)) {
    detail::put_doubles(out, lsvm->weights);
    out << detail::dtoa_hex(lsvm->bias) << "\n";
  } else if (const auto* gbt = std::get_if<GbtModel>(&m.impl)) {
    out << detail::dtoa_hex(gbt->base_score) << " " << detail::dtoa_hex(gbt->learning_rate)
        << " " << gbt->trees.size() << "\n";
    for (const auto& t : gbt->trees) detail::put_tree(out, t);
  } else if (const auto* rf = std::get_if<RfModel>(&m.impl)) {
    out << rf->trees.size() << "\n";
    for (const auto& t : rf->trees) detail::put_tree(out, t);
  } else {
    const auto& nn = std::get<NnModel>(m.impl);
    out << nn.widths.size();
    for (std::size_t w : nn.widths) out << " " << w;
    out << "\n";
    for (std::size_t l = 0; l < nn.layers(); ++l) {
      detail::put_doubles(out, nn.weights[l]);
      detail::put_doubles(out, nn.biases[l]);
    }
  }
  return out.str();
}

inline TrainedModel load_model(const std::string& text) {
  std::istringstream in(text);
  std::string magic, kind;
  in >> magic >> kind;
  if (magic != "SBMODEL1") throw ParseError("bad model container magic");
  TrainedModel m;
  m.kind = kind_from_name(kind);
  in >> m.input_dim;
  if (m.kind == ModelKind::kLsvm) {
    LsvmModel lsvm;
    lsvm.weights = detail::get_doubles(in);
    std::string b;
    in >> b;
    lsvm.bias = detail::atod_hex(b);
    m.impl = std::move(lsvm);
  } else if (m.kind == ModelKind::kGbt) {
    GbtModel gbt;
    std::string base, lr;
    std::size_t count;
    in >> base >> lr >> count;
    gbt.base_score = detail::atod_hex(base);
    gbt.learning_rate = detail::atod_hex(lr);
    for (std::size_t i = 0; i < count; ++i) gbt.trees.push_back(detail::get_tree(in));
    m.impl = std::move(gbt);
  } else if (m.kind == ModelKind::kRf) {
    RfModel rf;
    std::size_t count;
    in >> count;
    for (std::size_t i = 0; i < count; ++i) rf.trees.push_back(detail::get_tree(in));
    m.impl = std::move(rf);
  } else {
    NnModel nn;
    std::size_t nw;
    in >> nw;
    nn.widths.resize(nw);
    for (auto& w : nn.widths) in >> w;
    for (std::size_t l = 0; l + 1 < nw; ++l) {
      nn.weights.push_back(detail::get_doubles(in));
      nn.biases.push_back(detail::get_doubles(in));
    }
    m.impl = std::move(nn);
  }
  if (!in) throw ParseError("truncated model container");
  return m;
}

}  // namespace spoofbench
