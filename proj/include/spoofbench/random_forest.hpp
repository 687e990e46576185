#pragma once

// Bagged gini trees with per-node sqrt(d) feature subsampling. Score is the
// fraction of trees voting malicious.

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "spoofbench/dataset.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/rng.hpp"
#include "spoofbench/tree.hpp"

namespace spoofbench {

struct RfConfig {
  std::size_t trees = 300;
  std::size_t max_depth = 64;
  std::size_t min_leaf = 1;
};

struct RfModel {
  std::vector<Tree> trees;

  double score(const SparseRow& x) const {
    double votes = 0.0;
    for (const auto& t : trees) votes += t.predict(x) > 0.5 ? 1.0 : 0.0;
    return votes / static_cast<double>(trees.size());
  }
};

inline RfModel train_rf(const RfConfig& cfg, const Dataset& ds, std::uint64_t seed) {
  ds.check();
  if (cfg.trees < 1) throw ConfigError("rf needs at least one tree");
  const std::size_t n = ds.size();
  std::size_t pos = 0;
  for (int yi : ds.y) pos += yi;
  if (pos == 0 || pos == n) throw TrainError("single-class dataset");

  std::size_t mtry = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(ds.X.cols))));

  // grad = class indicator, hess = 1: the shared split gain then equals the
  // gini criterion and leaves carry the class-1 fraction.
  auto grad_of = [&](std::size_t r) {
    return std::pair<double, double>(static_cast<double>(ds.y[r]), 1.0);
  };
  auto leaf_value = [&](const std::vector<std::size_t>& rows) {
    double s = 0.0;
    for (std::size_t r : rows) s += static_cast<double>(ds.y[r]);
    return s / static_cast<double>(rows.size());
  };

  RfModel model;
  model.trees.resize(cfg.trees);
  for (std::size_t t = 0; t < cfg.trees; ++t) {
    Rng tree_rng = Rng(seed).split("rf-tree").split(t);
    std::vector<std::size_t> bootstrap(n);
    for (std::size_t i = 0; i < n; ++i)
      bootstrap[i] = static_cast<std::size_t>(tree_rng.bounded(n));

    Rng feat_rng = tree_rng.split("features");
    auto pick = [&]() {
      std::vector<std::uint32_t> feats;
      feats.reserve(mtry);
      for (std::size_t i : feat_rng.sample_indices(ds.X.cols, mtry))
        feats.push_back(static_cast<std::uint32_t>(i));
      return feats;
    };

    tree_detail::grow_tree(model.trees[t], ds.X, std::move(bootstrap), 0, cfg.max_depth,
                           cfg.min_leaf, grad_of, leaf_value, pick, 1e-9, 1e-12);
  }
  return model;
}

}  // namespace spoofbench
