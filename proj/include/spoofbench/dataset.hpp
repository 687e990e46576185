#pragma once

// Row-sparse feature matrix shared by every model. Binary matrices (Drebin)
// get a fast path in the tree builders; call-transition and projected rows
// carry real values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "spoofbench/errors.hpp"
#include "spoofbench/features.hpp"

namespace spoofbench {

struct SparseRow {
  std::vector<std::pair<std::uint32_t, double>> cells;  // sorted by column

  double dot(const SparseRow& o) const {
    double s = 0.0;
    std::size_t i = 0, j = 0;
    while (i < cells.size() && j < o.cells.size()) {
      if (cells[i].first < o.cells[j].first) ++i;
      else if (cells[i].first > o.cells[j].first) ++j;
      else s += cells[i++].second * o.cells[j++].second;
    }
    return s;
  }

  double norm2() const {
    double s = 0.0;
    for (const auto& [c, v] : cells) s += v * v;
    return s;
  }
};

struct FeatureMatrix {
  std::uint32_t cols = 0;
  bool binary = false;
  std::vector<SparseRow> rows;

  std::size_t size() const { return rows.size(); }
};

struct Dataset {
  FeatureMatrix X;
  std::vector<int> y;             // 0/1
  std::vector<std::string> ids;   // provenance per row

  std::size_t size() const { return y.size(); }
  void check() const {
    if (X.rows.size() != y.size() || y.size() != ids.size())
      throw ShapeError("dataset row/label/id counts disagree");
  }
};

inline SparseRow to_row(const SparseBinaryVector& v) {
  SparseRow r;
  r.cells.reserve(v.ones.size());
  for (std::uint32_t c : v.ones) r.cells.emplace_back(c, 1.0);
  return r;
}

inline SparseRow to_row(const MarkovFeatures& mf) {
  SparseRow r;
  for (std::size_t i = 0; i < mf.matrix.size(); ++i)
    if (mf.matrix[i] != 0.0) r.cells.emplace_back(static_cast<std::uint32_t>(i), mf.matrix[i]);
  return r;
}

inline SparseRow to_row(const std::vector<double>& dense) {
  SparseRow r;
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (dense[i] != 0.0) r.cells.emplace_back(static_cast<std::uint32_t>(i), dense[i]);
  return r;
}

inline std::vector<double> to_dense(const SparseRow& r, std::uint32_t cols) {
  std::vector<double> out(cols, 0.0);
  for (const auto& [c, v] : r.cells) out[c] = v;
  return out;
}

inline double squared_distance(const SparseRow& a, const SparseRow& b) {
  return a.norm2() + b.norm2() - 2.0 * a.dot(b);
}

// Exact k nearest rows to `query_row` (self excluded), euclidean metric,
// distance ties broken toward the smaller row id.
inline std::vector<std::size_t> knn_neighbors(const FeatureMatrix& X,
                                              std::size_t query_row, std::size_t k) {
  if (query_row >= X.rows.size()) throw ConfigError("query row out of range");
  if (k + 1 > X.rows.size())
    throw ConfigError("k=" + std::to_string(k) + " with only " +
                      std::to_string(X.rows.size()) + " rows");
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(X.rows.size() - 1);
  for (std::size_t i = 0; i < X.rows.size(); ++i) {
    if (i == query_row) continue;
    dist.emplace_back(squared_distance(X.rows[query_row], X.rows[i]), i);
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

}  // namespace spoofbench
