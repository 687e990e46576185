#include <cmath>
#include <limits>

#include <catch2/catch_amalgamated.hpp>

#include "spoofbench/metrics.hpp"

using namespace spoofbench;

namespace {

// Pairwise-comparison oracle: P(m > b) + 0.5 P(m == b).
double auc_oracle(const std::vector<double>& b, const std::vector<double>& m) {
  double s = 0.0;
  for (double mv : m)
    for (double bv : b) s += mv > bv ? 1.0 : (mv == bv ? 0.5 : 0.0);
  return s / (static_cast<double>(b.size()) * static_cast<double>(m.size()));
}

// Brute-force enumeration over every candidate threshold.
std::pair<double, double> rates_at(const std::vector<double>& b,
                                   const std::vector<double>& m, double t) {
  double fp = 0, tp = 0;
  for (double v : b) fp += v >= t;
  for (double v : m) tp += v >= t;
  return {fp / static_cast<double>(b.size()), tp / static_cast<double>(m.size())};
}

double tpr_at_fpr_oracle(const std::vector<double>& b, const std::vector<double>& m,
                         double alpha) {
  std::vector<double> thresholds = {std::numeric_limits<double>::infinity()};
  for (double v : b) thresholds.push_back(v);
  for (double v : m) thresholds.push_back(v);
  double best = 0.0;
  for (double t : thresholds) {
    auto [fpr, tpr] = rates_at(b, m, t);
    if (fpr <= alpha) best = std::max(best, tpr);
  }
  return best;
}

double fpr_at_tpr_oracle(const std::vector<double>& b, const std::vector<double>& m,
                         double beta) {
  std::vector<double> thresholds = {std::numeric_limits<double>::infinity()};
  for (double v : b) thresholds.push_back(v);
  for (double v : m) thresholds.push_back(v);
  double best = 1.0;
  for (double t : thresholds) {
    auto [fpr, tpr] = rates_at(b, m, t);
    if (tpr >= beta) best = std::min(best, fpr);
  }
  return best;
}

std::vector<double> random_scores(Rng& rng, std::size_t n, bool coarse) {
  std::vector<double> v(n);
  for (auto& x : v) x = coarse ? static_cast<double>(rng.bounded(8)) : rng.next_signed();
  return v;
}

}  // namespace

TEST_CASE("perfect and degenerate separations") {
  RocCurve perfect = roc_curve({0.1, 0.2}, {0.8, 0.9});
  CHECK(perfect.auc == 1.0);
  CHECK(tpr_at_fpr(perfect, 0.0) == 1.0);

  RocCurve flat = roc_curve({0.5, 0.5, 0.5}, {0.5, 0.5});
  CHECK(flat.auc == 0.5);
}

TEST_CASE("roc endpoints and monotonicity") {
  Rng rng(42);
  auto b = random_scores(rng, 50, false);
  auto m = random_scores(rng, 40, false);
  RocCurve roc = roc_curve(b, m);
  CHECK(roc.points.front().fpr == 0.0);
  CHECK(roc.points.front().tpr == 0.0);
  CHECK(roc.points.back().fpr == 1.0);
  CHECK(roc.points.back().tpr == 1.0);
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
    CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
  }
}

TEST_CASE("roc metrics match brute-force oracles on random score sets") {
  Rng rng(20250101);
  for (int rep = 0; rep < 50; ++rep) {
    bool coarse = rep % 2 == 0;  // coarse grids exercise score ties
    auto b = random_scores(rng, 20 + rng.bounded(180), coarse);
    auto m = random_scores(rng, 20 + rng.bounded(180), coarse);
    RocCurve roc = roc_curve(b, m);
    CHECK(std::abs(roc.auc - auc_oracle(b, m)) <= 1e-12);
    for (double alpha : {0.0, 0.001, 0.01, 0.1, 0.5, 1.0})
      CHECK(std::abs(tpr_at_fpr(roc, alpha) - tpr_at_fpr_oracle(b, m, alpha)) <= 1e-12);
    for (double beta : {0.0, 0.5, 0.9, 0.95, 1.0})
      CHECK(std::abs(fpr_at_tpr(roc, beta) - fpr_at_tpr_oracle(b, m, beta)) <= 1e-12);
  }
}

TEST_CASE("threshold_at_fpr realizes the reported operating point") {
  Rng rng(9);
  auto b = random_scores(rng, 100, true);
  auto m = random_scores(rng, 80, true);
  RocCurve roc = roc_curve(b, m);
  for (double alpha : {0.0, 0.01, 0.1, 0.3}) {
    double thr = threshold_at_fpr(roc, alpha);
    auto [fpr, tpr] = rates_at(b, m, thr);
    CHECK(fpr <= alpha + 1e-12);
    CHECK(tpr == tpr_at_fpr(roc, alpha));
  }
}

TEST_CASE("NaN scores are rejected") {
  CHECK_THROWS_AS(roc_curve({0.1, std::nan("")}, {0.5}), MetricError);
  CHECK_THROWS_AS(roc_curve({}, {0.5}), MetricError);
}

TEST_CASE("pearson on exact linear relations") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y2x = {2, 4, 6, 8, 10};
  std::vector<double> yneg = {9, 8, 7, 6, 5};
  CHECK(pearson_r(x, y2x) == Catch::Approx(1.0).margin(1e-12));
  CHECK(pearson_r(x, yneg) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("pearson matches the direct formula on the five-point example") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y = {2, 1, 4, 3, 6};
  // direct product-moment evaluation
  double mx = 3, my = 3.2;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  double expected = sxy / std::sqrt(sxx * syy);
  CHECK(std::abs(pearson_r(x, y) - expected) <= 1e-12);

  Correlation c = pearson(x, y, 2000, 7);
  CHECK(c.r == pearson_r(x, y));
  CHECK(c.p > 0.0);
  CHECK(c.p <= 1.0);
  // strong linear trend: the permutation test should find it unusual
  CHECK(c.p < 0.2);
}

TEST_CASE("pearson rejects degenerate inputs") {
  CHECK_THROWS_AS(pearson_r({1, 1, 1}, {1, 2, 3}), DegenerateInputError);
  CHECK_THROWS_AS(pearson_r({1, 2}, {1, 2}), DegenerateInputError);
}

TEST_CASE("spearman is 1 for any monotone map") {
  std::vector<double> x = {1, 2, 3, 4, 5, 6};
  std::vector<double> y = {0.1, 0.2, 0.9, 3.0, 50.0, 51.0};
  CHECK(spearman_rho(x, y) == Catch::Approx(1.0).margin(1e-12));
  std::vector<double> yr(y.rbegin(), y.rend());
  CHECK(spearman_rho(x, yr) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("permutation p-value is seeded and reproducible") {
  std::vector<double> x = {1, 2, 3, 4, 5, 6, 7};
  std::vector<double> y = {2, 4, 5, 4, 6, 8, 9};
  Correlation a = pearson(x, y, 5000, 123);
  Correlation b = pearson(x, y, 5000, 123);
  CHECK(a.r == b.r);
  CHECK(a.p == b.p);
}
