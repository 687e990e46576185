#include <algorithm>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "spoofbench/defense.hpp"

using namespace spoofbench;

namespace {

Dataset two_clusters(std::size_t per_side, double gap, std::uint64_t seed) {
  Dataset ds;
  ds.X.cols = 2;
  Rng rng(seed);
  for (std::size_t i = 0; i < per_side; ++i) {
    ds.X.rows.push_back(
        to_row(std::vector<double>{gap + rng.next_double(), gap + rng.next_double()}));
    ds.y.push_back(1);
    ds.ids.push_back("m" + std::to_string(i));
    ds.X.rows.push_back(
        to_row(std::vector<double>{-gap - rng.next_double(), -gap - rng.next_double()}));
    ds.y.push_back(0);
    ds.ids.push_back("b" + std::to_string(i));
  }
  return ds;
}

}  // namespace

TEST_CASE("well-separated pure clusters survive the filter") {
  Dataset ds = two_clusters(15, 5.0, 1);
  DefenseConfig cfg;
  cfg.k = 3;
  FilterResult fr = deep_knn_filter(ds.X, ds.y, cfg);
  CHECK(fr.removed.empty());
  CHECK(fr.kept.size() == ds.size());
}

TEST_CASE("a flipped point planted deep inside the other cluster is removed") {
  Dataset ds = two_clusters(15, 5.0, 2);
  ds.X.rows.push_back(to_row(std::vector<double>{5.5, 5.5}));  // inside cluster 1
  ds.y.push_back(0);  // carries the wrong label
  ds.ids.push_back("planted");
  DefenseConfig cfg;
  cfg.k = 3;
  FilterResult fr = deep_knn_filter(ds.X, ds.y, cfg);
  REQUIRE(fr.removed.size() == 1);
  CHECK(fr.removed[0] == ds.size() - 1);
}

TEST_CASE("mutually-adjacent identical poisons defeat the filter") {
  Dataset ds = two_clusters(30, 5.0, 3);
  // 20 identical-featured points with the attack label parked mid-field
  for (int i = 0; i < 20; ++i) {
    ds.X.rows.push_back(to_row(std::vector<double>{0.0, 0.0}));
    ds.y.push_back(1);
    ds.ids.push_back("p" + std::to_string(i));
  }
  DefenseConfig cfg;
  cfg.k = 11;
  FilterResult fr = deep_knn_filter(ds.X, ds.y, cfg);
  for (std::size_t i = ds.size() - 20; i < ds.size(); ++i)
    CHECK(std::find(fr.kept.begin(), fr.kept.end(), i) != fr.kept.end());
}

TEST_CASE("neighbor-label ties keep the row") {
  Dataset ds;
  ds.X.cols = 1;
  // query 0 with two equidistant neighbors of opposite labels
  ds.X.rows = {to_row(std::vector<double>{0.0}), to_row(std::vector<double>{1.0}),
               to_row(std::vector<double>{-1.0}), to_row(std::vector<double>{5.0})};
  ds.y = {1, 0, 1, 0};
  ds.ids = {"q", "a", "b", "far"};
  DefenseConfig cfg;
  cfg.k = 2;
  FilterResult fr = deep_knn_filter(ds.X, ds.y, cfg);
  CHECK(fr.tallies[0].label0 == 1);
  CHECK(fr.tallies[0].label1 == 1);
  CHECK(std::find(fr.kept.begin(), fr.kept.end(), 0u) != fr.kept.end());
}

TEST_CASE("filter is label-permutation equivariant") {
  Dataset ds = two_clusters(10, 1.0, 5);
  ds.X.rows.push_back(to_row(std::vector<double>{1.2, 1.2}));
  ds.y.push_back(0);
  ds.ids.push_back("odd");
  DefenseConfig cfg;
  cfg.k = 3;
  FilterResult a = deep_knn_filter(ds.X, ds.y, cfg);
  std::vector<int> flipped = ds.y;
  for (auto& v : flipped) v = 1 - v;
  FilterResult b = deep_knn_filter(ds.X, flipped, cfg);
  CHECK(a.kept == b.kept);
  CHECK(a.removed == b.removed);
}

TEST_CASE("unanimous neighborhoods are never removed") {
  Dataset ds = two_clusters(20, 2.0, 7);
  DefenseConfig cfg;
  cfg.k = 5;
  FilterResult fr = deep_knn_filter(ds.X, ds.y, cfg);
  std::set<std::size_t> removed(fr.removed.begin(), fr.removed.end());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    bool unanimous = (ds.y[i] == 1 && fr.tallies[i].label1 == cfg.k) ||
                     (ds.y[i] == 0 && fr.tallies[i].label0 == cfg.k);
    if (unanimous) CHECK(removed.count(i) == 0);
  }
}

TEST_CASE("filter rejects k >= rows and single-class input") {
  Dataset ds = two_clusters(3, 2.0, 9);
  DefenseConfig cfg;
  cfg.k = 6;
  CHECK_THROWS_AS(deep_knn_filter(ds.X, ds.y, cfg), ConfigError);
  std::vector<int> ones(ds.size(), 1);
  cfg.k = 3;
  CHECK_THROWS_AS(deep_knn_filter(ds.X, ones, cfg), ConfigError);
}

TEST_CASE("defended training on clean data matches undefended sign patterns") {
  Dataset ds = two_clusters(20, 4.0, 11);
  DefenseConfig dcfg;
  dcfg.k = 3;
  ModelConfig mcfg;
  mcfg.kind = ModelKind::kLsvm;
  mcfg.seed = 3;
  DefendedModel dm = defend_and_retrain(ds, dcfg, mcfg);
  TrainedModel undefended = train(mcfg, ds);
  auto s1 = predict(dm.model, ds.X);
  auto s2 = predict(undefended, ds.X);
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK((s1[i] > 0) == (s2[i] > 0));
  CHECK(dm.filter.removed.empty());
}

TEST_CASE("defense helps against isolated label noise") {
  // 5% flips far from the boundary
  Dataset ds = two_clusters(40, 4.0, 13);
  Rng rng(15);
  std::vector<std::size_t> flipped;
  for (int i = 0; i < 4; ++i) {
    std::size_t at = rng.bounded(ds.size());
    ds.y[at] = 1 - ds.y[at];
    flipped.push_back(at);
  }
  Dataset test = two_clusters(40, 4.0, 17);

  ModelConfig mcfg;
  mcfg.kind = ModelKind::kLsvm;
  mcfg.seed = 5;
  DefenseConfig dcfg;
  dcfg.k = 3;
  auto accuracy = [&](const TrainedModel& m) {
    auto scores = predict(m, test.X);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      ok += (scores[i] > 0.0) == (test.y[i] == 1);
    return static_cast<double>(ok) / static_cast<double>(test.y.size());
  };
  double defended = accuracy(defend_and_retrain(ds, dcfg, mcfg).model);
  double undefended = accuracy(train(mcfg, ds));
  CHECK(defended >= undefended);
}

TEST_CASE("removing an entire class raises DefenseError") {
  // lone benign row surrounded by malicious ones
  Dataset ds;
  ds.X.cols = 1;
  for (int i = 0; i < 6; ++i) {
    ds.X.rows.push_back(to_row(std::vector<double>{static_cast<double>(i) * 0.01}));
    ds.y.push_back(1);
    ds.ids.push_back("m" + std::to_string(i));
  }
  ds.X.rows.push_back(to_row(std::vector<double>{0.02}));
  ds.y.push_back(0);
  ds.ids.push_back("lonely");
  DefenseConfig dcfg;
  dcfg.k = 3;
  ModelConfig mcfg;
  mcfg.kind = ModelKind::kLsvm;
  CHECK_THROWS_AS(defend_and_retrain(ds, dcfg, mcfg), DefenseError);
}

TEST_CASE("penultimate-space filtering requires the nn kind") {
  Dataset ds = two_clusters(15, 4.0, 19);
  DefenseConfig dcfg;
  dcfg.k = 3;
  dcfg.space = DefenseSpace::kNnPenultimate;
  ModelConfig lsvm_cfg;
  lsvm_cfg.kind = ModelKind::kLsvm;
  CHECK_THROWS_AS(defend_and_retrain(ds, dcfg, lsvm_cfg), KindError);

  ModelConfig nn_cfg;
  nn_cfg.kind = ModelKind::kNn;
  nn_cfg.nn.hidden = {6, 4};
  nn_cfg.nn.epochs = 60;
  nn_cfg.seed = 21;
  DefendedModel dm = defend_and_retrain(ds, dcfg, nn_cfg);
  CHECK(dm.filter.kept.size() + dm.filter.removed.size() == ds.size());
}
