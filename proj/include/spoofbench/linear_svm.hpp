#pragma once

// L2-regularized hinge loss, objective 0.5*|w|^2 + lambda * sum_i hinge_i,
// trained by epoch-ordered subgradient descent with the 1/(reg*t) schedule
// (reg = 1/(lambda*n), the per-sample form of the same objective). Weights
// are kept as scale * direction so the per-step shrink costs O(1) and
// violation updates stay sparse.

#include <cstdint>
#include <vector>

#include "spoofbench/dataset.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/rng.hpp"

namespace spoofbench {

struct LsvmConfig {
  double lambda = 1.0;  // hinge-loss weight, liblinear-style C
  std::size_t epochs = 50;
};

struct LsvmModel {
  std::vector<double> weights;
  double bias = 0.0;

  double score(const SparseRow& x) const {
    double s = bias;
    for (const auto& [c, v] : x.cells)
      if (c < weights.size()) s += weights[c] * v;
    return s;
  }
};

inline LsvmModel train_lsvm(const LsvmConfig& cfg, const Dataset& ds,
                            std::uint64_t seed) {
  ds.check();
  if (cfg.lambda <= 0.0) throw ConfigError("lsvm lambda must be > 0");
  const std::size_t n = ds.size();
  const double reg = 1.0 / (cfg.lambda * static_cast<double>(n));

  std::vector<double> v(ds.X.cols, 0.0);
  double scale = 1.0;
  double bias = 0.0;
  Rng rng = Rng(seed).split("lsvm");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      ++t;
      double eta = 1.0 / (reg * static_cast<double>(t));
      double shrink = 1.0 - eta * reg;  // = 1 - 1/t
      const SparseRow& x = ds.X.rows[idx];
      double yi = ds.y[idx] == 1 ? 1.0 : -1.0;
      double margin = bias;
      for (const auto& [c, val] : x.cells) margin += scale * v[c] * val;
      margin *= yi;

      if (shrink == 0.0) {  // first step collapses the old iterate entirely
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        for (const auto& [c, val] : x.cells) v[c] += eta * yi * val / scale;
        bias += yi / static_cast<double>(t);  // unregularized, 1/t decay
      }
      if (scale < 1e-9) {  // renormalize before the scale underflows
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
    }
  }

  LsvmModel model;
  model.weights.resize(ds.X.cols);
  for (std::size_t c = 0; c < ds.X.cols; ++c) model.weights[c] = scale * v[c];
  model.bias = bias;
  return model;
}

}  // namespace spoofbench
