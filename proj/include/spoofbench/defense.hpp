#pragma once

// Deep-KNN training-set sanitizer: a row survives iff its own label matches
// the plurality label of its k nearest neighbors. Ties keep the row. The
// filter runs either on the input features or, for the nn kind, on the
// penultimate activations of a model trained on the (possibly poisoned) data.

#include <cstdint>
#include <string>
#include <vector>

#include "spoofbench/dataset.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/model.hpp"

namespace spoofbench {

enum class DefenseSpace : std::uint8_t { kInputFeatures, kNnPenultimate };

struct DefenseConfig {
  std::size_t k = 3;
  DefenseSpace space = DefenseSpace::kInputFeatures;
};

struct NeighborTally {
  std::size_t label0 = 0;
  std::size_t label1 = 0;
};

struct FilterResult {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> removed;
  std::vector<NeighborTally> tallies;  // per input row
};

inline FilterResult deep_knn_filter(const FeatureMatrix& X, const std::vector<int>& y,
                                    const DefenseConfig& cfg) {
  if (X.rows.size() != y.size()) throw ShapeError("row/label count mismatch");
  if (cfg.k >= X.rows.size())
    throw ConfigError("k=" + std::to_string(cfg.k) + " with only " +
                      std::to_string(X.rows.size()) + " rows");
  {
    std::size_t pos = 0;
    for (int yi : y) pos += yi;
    if (pos == 0 || pos == y.size())
      throw ConfigError("filter needs both classes present");
  }

  FilterResult out;
  out.tallies.resize(y.size());
  for (std::size_t i = 0; i < X.rows.size(); ++i) {
    for (std::size_t n : knn_neighbors(X, i, cfg.k)) {
      if (y[n] == 1) ++out.tallies[i].label1;
      else ++out.tallies[i].label0;
    }
    const auto& t = out.tallies[i];
    bool keep;
    if (t.label0 == t.label1) keep = true;
    else keep = (t.label1 > t.label0) == (y[i] == 1);
    (keep ? out.kept : out.removed).push_back(i);
  }
  return out;
}

struct DefendedModel {
  TrainedModel model;
  FilterResult filter;
};

inline Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.X.cols = ds.X.cols;
  out.X.binary = ds.X.binary;
  for (std::size_t r : rows) {
    out.X.rows.push_back(ds.X.rows[r]);
    out.y.push_back(ds.y[r]);
    out.ids.push_back(ds.ids[r]);
  }
  return out;
}

inline DefendedModel defend_and_retrain(const Dataset& ds, const DefenseConfig& defense,
                                        const ModelConfig& model_cfg) {
  ds.check();
  DefendedModel out;
  if (defense.space == DefenseSpace::kNnPenultimate) {
    if (model_cfg.kind != ModelKind::kNn)
      throw KindError("penultimate-space filtering needs the nn kind");
    TrainedModel prelim = train(model_cfg, ds);
    DenseMatrix acts = nn_penultimate(prelim, ds.X);
    FeatureMatrix deep;
    deep.cols = static_cast<std::uint32_t>(acts.empty() ? 0 : acts[0].size());
    for (const auto& a : acts) deep.rows.push_back(to_row(a));
    out.filter = deep_knn_filter(deep, ds.y, defense);
  } else {
    out.filter = deep_knn_filter(ds.X, ds.y, defense);
  }

  Dataset kept = select_rows(ds, out.filter.kept);
  bool has0 = false, has1 = false;
  for (int yi : kept.y) (yi == 1 ? has1 : has0) = true;
  if (!has0 || !has1)
    throw DefenseError("filter removed an entire class (" +
                       std::to_string(out.filter.removed.size()) + " rows dropped)");
  out.model = train(model_cfg, kept);
  return out;
}

}  // namespace spoofbench
