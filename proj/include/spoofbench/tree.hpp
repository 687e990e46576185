#pragma once

// Regression/classification tree machinery shared by the boosted and bagged
// ensembles. Split search is sparse-aware: implicit zeros are grouped at
// value 0 and candidate thresholds sweep the observed values of each column.
// With g = class indicator and h = 1 the second-order gain reduces to the
// gini criterion, so one search serves both ensembles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "spoofbench/dataset.hpp"
#include "spoofbench/rng.hpp"

namespace spoofbench {

struct TreeNode {
  // leaf when feature == UINT32_MAX
  std::uint32_t feature = std::numeric_limits<std::uint32_t>::max();
  double threshold = 0.0;  // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf payload (weight or class fraction)

  bool is_leaf() const { return feature == std::numeric_limits<std::uint32_t>::max(); }
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const SparseRow& x) const {
    std::int32_t at = 0;
    while (!nodes[at].is_leaf()) {
      double v = 0.0;
      for (const auto& [c, val] : x.cells) {
        if (c == nodes[at].feature) {
          v = val;
          break;
        }
        if (c > nodes[at].feature) break;
      }
      at = v <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    }
    return nodes[at].value;
  }
};

namespace tree_detail {

struct GradPair {
  double g = 0.0;
  double h = 0.0;
  std::size_t n = 0;

  void add(double gg, double hh) {
    g += gg;
    h += hh;
    ++n;
  }
  void absorb(const GradPair& o) {
    g += o.g;
    h += o.h;
    n += o.n;
  }
  void sub(const GradPair& o) {
    g -= o.g;
    h -= o.h;
    n -= o.n;
  }
};

struct SplitChoice {
  bool found = false;
  std::uint32_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

inline double side_score(const GradPair& p, double reg_lambda) {
  return p.g * p.g / (p.h + reg_lambda);
}

inline double split_gain(const GradPair& left, const GradPair& right,
                         const GradPair& total, double reg_lambda) {
  return 0.5 * (side_score(left, reg_lambda) + side_score(right, reg_lambda) -
                side_score(total, reg_lambda));
}

// Best (feature, threshold) over `features` for the rows in `node_rows`.
// grad_of(row) -> (g, h).
template <typename RowGrad>
SplitChoice best_split(const FeatureMatrix& X, const std::vector<std::size_t>& node_rows,
                       const std::vector<std::uint32_t>& features, const RowGrad& grad_of,
                       double reg_lambda, double min_gain) {
  GradPair total;
  for (std::size_t r : node_rows) {
    auto [g, h] = grad_of(r);
    total.add(g, h);
  }

  SplitChoice best;
  best.gain = min_gain;
  std::vector<char> wanted(X.cols, 0);
  for (std::uint32_t f : features) wanted[f] = 1;

  if (X.binary) {
    // One candidate per feature: x == 0 vs x == 1.
    std::map<std::uint32_t, GradPair> ones;
    for (std::size_t r : node_rows) {
      auto [g, h] = grad_of(r);
      for (const auto& [c, v] : X.rows[r].cells)
        if (wanted[c]) ones[c].add(g, h);
    }
    for (const auto& [f, one_side] : ones) {
      if (one_side.n == 0 || one_side.n == total.n) continue;
      GradPair zero_side = total;
      zero_side.sub(one_side);
      double gain = split_gain(zero_side, one_side, total, reg_lambda);
      if (gain > best.gain) best = {true, f, 0.5, gain};
    }
    return best;
  }

  // General path: per-feature nonzero values gathered within the node, zeros
  // grouped at value 0, thresholds at midpoints of consecutive groups.
  std::map<std::uint32_t, std::vector<std::pair<double, std::size_t>>> columns;
  for (std::size_t r : node_rows)
    for (const auto& [c, v] : X.rows[r].cells)
      if (wanted[c]) columns[c].emplace_back(v, r);

  struct Group {
    double value;
    GradPair stats;
  };
  for (auto& [f, vals] : columns) {
    GradPair nonzero;
    for (const auto& [v, r] : vals) {
      auto [g, h] = grad_of(r);
      nonzero.add(g, h);
    }
    GradPair zeros = total;
    zeros.sub(nonzero);

    std::sort(vals.begin(), vals.end());
    std::vector<Group> groups;
    bool zero_placed = zeros.n == 0;
    std::size_t i = 0;
    while (i < vals.size()) {
      double v = vals[i].first;
      if (!zero_placed && v > 0.0) {
        groups.push_back({0.0, zeros});
        zero_placed = true;
        continue;
      }
      Group grp{v, {}};
      while (i < vals.size() && vals[i].first == v) {
        auto [g, h] = grad_of(vals[i].second);
        grp.stats.add(g, h);
        ++i;
      }
      groups.push_back(grp);
    }
    if (!zero_placed) groups.push_back({0.0, zeros});

    GradPair left;
    for (std::size_t gi = 0; gi + 1 < groups.size(); ++gi) {
      left.absorb(groups[gi].stats);
      GradPair right = total;
      right.sub(left);
      if (left.n == 0 || right.n == 0) continue;
      double gain = split_gain(left, right, total, reg_lambda);
      if (gain > best.gain) {
        double thr = 0.5 * (groups[gi].value + groups[gi + 1].value);
        best = {true, f, thr, gain};
      }
    }
  }
  return best;
}

// Depth-first recursive builder driven by callbacks; returns node index.
template <typename RowGrad, typename LeafValue, typename FeaturePick>
std::int32_t grow_tree(Tree& tree, const FeatureMatrix& X,
                       std::vector<std::size_t> node_rows, std::size_t depth,
                       std::size_t max_depth, std::size_t min_leaf,
                       const RowGrad& grad_of, const LeafValue& leaf_value,
                       const FeaturePick& pick_features, double reg_lambda,
                       double min_gain) {
  std::int32_t self = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();

  bool can_split = node_rows.size() >= 2 * min_leaf && depth < max_depth;
  SplitChoice choice;
  if (can_split) {
    std::vector<std::uint32_t> feats = pick_features();
    choice = best_split(X, node_rows, feats, grad_of, reg_lambda, min_gain);
  }
  if (!can_split || !choice.found) {
    tree.nodes[self].value = leaf_value(node_rows);
    return self;
  }

  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t r : node_rows) {
    double v = 0.0;
    for (const auto& [c, val] : X.rows[r].cells) {
      if (c == choice.feature) {
        v = val;
        break;
      }
      if (c > choice.feature) break;
    }
    (v <= choice.threshold ? left_rows : right_rows).push_back(r);
  }
  if (left_rows.empty() || right_rows.empty()) {
    tree.nodes[self].value = leaf_value(node_rows);
    return self;
  }
  node_rows.clear();
  node_rows.shrink_to_fit();

  tree.nodes[self].feature = choice.feature;
  tree.nodes[self].threshold = choice.threshold;
  std::int32_t l = grow_tree(tree, X, std::move(left_rows), depth + 1, max_depth,
                             min_leaf, grad_of, leaf_value, pick_features, reg_lambda,
                             min_gain);
  std::int32_t r = grow_tree(tree, X, std::move(right_rows), depth + 1, max_depth,
                             min_leaf, grad_of, leaf_value, pick_features, reg_lambda,
                             min_gain);
  tree.nodes[self].left = l;
  tree.nodes[self].right = r;
  return self;
}

}  // namespace tree_detail

}  // namespace spoofbench
