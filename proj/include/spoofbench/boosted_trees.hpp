#pragma once

// Gradient boosted trees for the logistic objective: depth-limited regression
// trees fit to (g, h) = (p - y, p(1 - p)), Newton leaf weights, shrinkage.
// Score is the sigmoid of the accumulated tree sum.

#include <cmath>
#include <cstdint>
#include <vector>

#include "spoofbench/dataset.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/tree.hpp"

namespace spoofbench {

struct GbtConfig {
  std::size_t trees = 300;
  std::size_t depth = 3;
  double learning_rate = 0.1;
  double reg_lambda = 1.0;
};

struct GbtModel {
  double base_score = 0.0;  // log-odds prior
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  std::vector<double> train_loss;  // mean logistic loss after each round

  double raw_score(const SparseRow& x) const {
    double s = base_score;
    for (const auto& t : trees) s += learning_rate * t.predict(x);
    return s;
  }
  double score(const SparseRow& x) const { return 1.0 / (1.0 + std::exp(-raw_score(x))); }
};

inline GbtModel train_gbt(const GbtConfig& cfg, const Dataset& ds) {
  ds.check();
  if (cfg.trees < 1) throw ConfigError("gbt needs at least one tree");
  const std::size_t n = ds.size();

  std::size_t pos = 0;
  for (int yi : ds.y) pos += yi;
  if (pos == 0 || pos == n) throw TrainError("single-class dataset");

  GbtModel model;
  model.learning_rate = cfg.learning_rate;
  double p0 = static_cast<double>(pos) / static_cast<double>(n);
  model.base_score = std::log(p0 / (1.0 - p0));

  std::vector<double> raw(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<std::uint32_t> all_features(ds.X.cols);
  for (std::uint32_t f = 0; f < ds.X.cols; ++f) all_features[f] = f;
  std::vector<std::size_t> all_rows(n);
  for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;

  auto mean_loss = [&] {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = 1.0 / (1.0 + std::exp(-raw[i]));
      p = std::min(std::max(p, 1e-15), 1.0 - 1e-15);
      loss += ds.y[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    return loss / static_cast<double>(n);
  };

  for (std::size_t round = 0; round < cfg.trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      double p = 1.0 / (1.0 + std::exp(-raw[i]));
      grad[i] = p - static_cast<double>(ds.y[i]);
      hess[i] = p * (1.0 - p);
    }
    auto grad_of = [&](std::size_t r) { return std::pair<double, double>(grad[r], hess[r]); };
    auto leaf_value = [&](const std::vector<std::size_t>& rows) {
      double g = 0.0, h = 0.0;
      for (std::size_t r : rows) {
        g += grad[r];
        h += hess[r];
      }
      return -g / (h + cfg.reg_lambda);
    };
    auto pick = [&]() { return all_features; };

    Tree t;
    tree_detail::grow_tree(t, ds.X, all_rows, 0, cfg.depth, 1, grad_of, leaf_value, pick,
                           cfg.reg_lambda, 1e-12);
    for (std::size_t i = 0; i < n; ++i)
      raw[i] += cfg.learning_rate * t.predict(ds.X.rows[i]);
    model.trees.push_back(std::move(t));
    model.train_loss.push_back(mean_loss());
    if (!std::isfinite(model.train_loss.back()))
      throw DivergenceError("non-finite loss at round " + std::to_string(round));
  }
  return model;
}

}  // namespace spoofbench
