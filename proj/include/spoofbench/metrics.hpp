#pragma once

// ROC machinery and correlation measures. The ROC is a full threshold sweep
// over the observed scores: point k classifies "malicious" at score >= t_k,
// starting from the empty classifier at t = +inf down to the all-positive one.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "spoofbench/errors.hpp"
#include "spoofbench/rng.hpp"

namespace spoofbench {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = std::numeric_limits<double>::infinity();
};

struct RocCurve {
  std::vector<RocPoint> points;  // fpr non-decreasing, (0,0) .. (1,1)
  double auc = 0.0;
};

inline RocCurve roc_curve(const std::vector<double>& benign_scores,
                          const std::vector<double>& malicious_scores) {
  if (benign_scores.empty() || malicious_scores.empty())
    throw MetricError("roc needs scores from both classes");
  for (double s : benign_scores)
    if (std::isnan(s)) throw MetricError("NaN benign score");
  for (double s : malicious_scores)
    if (std::isnan(s)) throw MetricError("NaN malicious score");

  std::vector<double> b = benign_scores, m = malicious_scores;
  std::sort(b.begin(), b.end(), std::greater<>());
  std::sort(m.begin(), m.end(), std::greater<>());

  RocCurve roc;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  const double nb = static_cast<double>(b.size());
  const double nm = static_cast<double>(m.size());
  std::size_t bi = 0, mi = 0;
  while (bi < b.size() || mi < m.size()) {
    double t;
    if (bi < b.size() && mi < m.size()) t = std::max(b[bi], m[mi]);
    else if (bi < b.size()) t = b[bi];
    else t = m[mi];
    while (bi < b.size() && b[bi] >= t) ++bi;
    while (mi < m.size() && m[mi] >= t) ++mi;
    roc.points.push_back({static_cast<double>(bi) / nb, static_cast<double>(mi) / nm, t});
  }

  double auc = 0.0;
  for (std::size_t i = 1; i < roc.points.size(); ++i)
    auc += (roc.points[i].fpr - roc.points[i - 1].fpr) *
           (roc.points[i].tpr + roc.points[i - 1].tpr) * 0.5;
  roc.auc = auc;
  return roc;
}

// Highest tpr reachable while fpr stays at or below alpha (step reading).
inline double tpr_at_fpr(const RocCurve& roc, double alpha) {
  double best = 0.0;
  for (const auto& p : roc.points)
    if (p.fpr <= alpha) best = std::max(best, p.tpr);
  return best;
}

// Score cutoff realizing tpr_at_fpr(alpha) on the same curve.
inline double threshold_at_fpr(const RocCurve& roc, double alpha) {
  double best_tpr = -1.0;
  double thr = std::numeric_limits<double>::infinity();
  for (const auto& p : roc.points)
    if (p.fpr <= alpha && p.tpr > best_tpr) {
      best_tpr = p.tpr;
      thr = p.threshold;
    }
  return thr;
}

// Lowest fpr among operating points reaching tpr >= beta.
inline double fpr_at_tpr(const RocCurve& roc, double beta) {
  double best = 1.0;
  for (const auto& p : roc.points)
    if (p.tpr >= beta) best = std::min(best, p.fpr);
  return best;
}

struct Correlation {
  double r = 0.0;
  double p = 1.0;
};

inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw DegenerateInputError("pearson needs >= 3 paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("constant input to pearson");
  return sxy / std::sqrt(sxx * syy);
}

// Two-sided permutation p-value with a seeded shuffle of y.
inline Correlation pearson(const std::vector<double>& x, const std::vector<double>& y,
                           std::size_t permutations = 10000, std::uint64_t seed = 0) {
  Correlation c;
  c.r = pearson_r(x, y);
  Rng rng = Rng(seed).split("pearson-perm");
  std::vector<double> yp = y;
  std::size_t at_least = 0;
  for (std::size_t i = 0; i < permutations; ++i) {
    rng.shuffle(yp);
    double rp;
    try {
      rp = pearson_r(x, yp);
    } catch (const DegenerateInputError&) {
      rp = 0.0;
    }
    if (std::abs(rp) >= std::abs(c.r) - 1e-12) ++at_least;
  }
  c.p = static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
  return c;
}

inline std::vector<double> ranks_with_ties(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson_r(ranks_with_ties(x), ranks_with_ties(y));
}

}  // namespace spoofbench
