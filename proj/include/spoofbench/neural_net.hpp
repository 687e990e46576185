#pragma once

// Feed-forward network, sigmoid activation at every layer including the
// single-unit output, binary cross-entropy loss, Adam updates. Inputs are
// dense (transition features directly, projected vectors for the sparse
// binary pipeline).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spoofbench/errors.hpp"
#include "spoofbench/rng.hpp"

namespace spoofbench {

struct NnConfig {
  std::vector<std::size_t> hidden = {64, 32, 16};
  std::size_t epochs = 200;
  std::size_t batch = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using DenseMatrix = std::vector<std::vector<double>>;

struct NnModel {
  std::vector<std::size_t> widths;            // [in, hidden..., 1]
  std::vector<std::vector<double>> weights;   // layer l: widths[l+1] x widths[l], row-major
  std::vector<std::vector<double>> biases;    // layer l: widths[l+1]

  std::size_t layers() const { return weights.size(); }

  // Activations for every layer, a[0] = input.
  std::vector<std::vector<double>> forward(const std::vector<double>& x) const {
    std::vector<std::vector<double>> a(layers() + 1);
    a[0] = x;
    for (std::size_t l = 0; l < layers(); ++l) {
      std::size_t in = widths[l], out = widths[l + 1];
      a[l + 1].resize(out);
      for (std::size_t o = 0; o < out; ++o) {
        double z = biases[l][o];
        const double* wrow = &weights[l][o * in];
        for (std::size_t i = 0; i < in; ++i) z += wrow[i] * a[l][i];
        a[l + 1][o] = 1.0 / (1.0 + std::exp(-z));
      }
    }
    return a;
  }

  double score(const std::vector<double>& x) const { return forward(x).back()[0]; }

  // Last hidden layer activations (the representation the deep filter uses).
  std::vector<double> penultimate(const std::vector<double>& x) const {
    auto a = forward(x);
    return a[a.size() - 2];
  }
};

struct NnGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

inline double nn_loss(const NnModel& model, const DenseMatrix& X,
                      const std::vector<int>& y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double p = model.score(X[i]);
    p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
    loss += y[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return loss / static_cast<double>(X.size());
}

// Mean-BCE gradients over the batch by plain backprop.
inline NnGradients nn_gradients(const NnModel& model, const DenseMatrix& X,
                                const std::vector<int>& y) {
  NnGradients g;
  g.weights.resize(model.layers());
  g.biases.resize(model.layers());
  for (std::size_t l = 0; l < model.layers(); ++l) {
    g.weights[l].assign(model.weights[l].size(), 0.0);
    g.biases[l].assign(model.biases[l].size(), 0.0);
  }
  const double inv_n = 1.0 / static_cast<double>(X.size());

  for (std::size_t i = 0; i < X.size(); ++i) {
    auto a = model.forward(X[i]);
    // dL/dz at the output for sigmoid + BCE is (p - y).
    std::vector<double> delta = {(a.back()[0] - static_cast<double>(y[i])) * inv_n};
    for (std::size_t l = model.layers(); l-- > 0;) {
      std::size_t in = model.widths[l], out = model.widths[l + 1];
      std::vector<double> delta_prev(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        g.biases[l][o] += delta[o];
        double* grow = &g.weights[l][o * in];
        const double* wrow = &model.weights[l][o * in];
        for (std::size_t k = 0; k < in; ++k) {
          grow[k] += delta[o] * a[l][k];
          delta_prev[k] += delta[o] * wrow[k];
        }
      }
      if (l > 0)
        for (std::size_t k = 0; k < in; ++k)
          delta_prev[k] *= a[l][k] * (1.0 - a[l][k]);
      delta = std::move(delta_prev);
    }
  }
  return g;
}

inline NnModel init_nn(std::size_t input_dim, const NnConfig& cfg, std::uint64_t seed) {
  NnModel model;
  model.widths.push_back(input_dim);
  for (std::size_t w : cfg.hidden) model.widths.push_back(w);
  model.widths.push_back(1);
  for (std::size_t l = 0; l + 1 < model.widths.size(); ++l) {
    if (model.widths[l] == 0) throw ConfigError("zero-width layer");
    std::size_t in = model.widths[l], out = model.widths[l + 1];
    Rng rng = Rng(seed).split("nn-init").split(l);
    double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (double& x : w) x = rng.next_signed() * bound;
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::vector<double>(out, 0.0));
  }
  return model;
}

inline NnModel train_nn(const NnConfig& cfg, const DenseMatrix& X,
                        const std::vector<int>& y, std::uint64_t seed) {
  if (X.empty()) throw TrainError("empty training set");
  if (X.size() != y.size()) throw ShapeError("row/label count mismatch");
  std::size_t pos = 0;
  for (int yi : y) pos += yi;
  if (pos == 0 || pos == y.size()) throw TrainError("single-class dataset");

  NnModel model = init_nn(X[0].size(), cfg, seed);
  NnGradients m, v;  // Adam moments
  m.weights.resize(model.layers());
  m.biases.resize(model.layers());
  v.weights.resize(model.layers());
  v.biases.resize(model.layers());
  for (std::size_t l = 0; l < model.layers(); ++l) {
    m.weights[l].assign(model.weights[l].size(), 0.0);
    m.biases[l].assign(model.biases[l].size(), 0.0);
    v.weights[l].assign(model.weights[l].size(), 0.0);
    v.biases[l].assign(model.biases[l].size(), 0.0);
  }

  Rng shuffle_rng = Rng(seed).split("nn-shuffle");
  std::vector<std::size_t> order(X.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t adam_t = 0;
  auto adam_update = [&](std::vector<double>& theta, std::vector<double>& mm,
                         std::vector<double>& vv, const std::vector<double>& grad) {
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_t));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * grad[i];
      vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      theta[i] -= cfg.learning_rate * (mm[i] / bc1) / (std::sqrt(vv[i] / bc2) + cfg.eps);
    }
  };

  std::size_t batch = cfg.batch == 0 ? X.size() : std::min(cfg.batch, X.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::size_t end = std::min(start + batch, order.size());
      DenseMatrix bx;
      std::vector<int> by;
      bx.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(X[order[i]]);
        by.push_back(y[order[i]]);
      }
      NnGradients g = nn_gradients(model, bx, by);
      ++adam_t;
      for (std::size_t l = 0; l < model.layers(); ++l) {
        adam_update(model.weights[l], m.weights[l], v.weights[l], g.weights[l]);
        adam_update(model.biases[l], m.biases[l], v.biases[l], g.biases[l]);
      }
    }
    double loss = nn_loss(model, X, y);
    if (!std::isfinite(loss))
      throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch));
  }
  return model;
}

}  // namespace spoofbench
