#include <algorithm>
#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "spoofbench/model.hpp"

using namespace spoofbench;

namespace {

// Two linearly separable clusters in 2d, 10 points each.
Dataset separable_clusters() {
  Dataset ds;
  ds.X.cols = 2;
  Rng rng(404);
  for (int i = 0; i < 10; ++i) {
    ds.X.rows.push_back(to_row(std::vector<double>{1.0 + rng.next_double() * 0.5,
                                                   1.0 + rng.next_double() * 0.5}));
    ds.y.push_back(1);
    ds.ids.push_back("m" + std::to_string(i));
    ds.X.rows.push_back(to_row(std::vector<double>{-1.0 - rng.next_double() * 0.5,
                                                   -1.0 - rng.next_double() * 0.5}));
    ds.y.push_back(0);
    ds.ids.push_back("b" + std::to_string(i));
  }
  return ds;
}

Dataset random_binary(std::size_t n, std::uint32_t dim, std::uint64_t seed) {
  Dataset ds;
  ds.X.cols = dim;
  ds.X.binary = true;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    SparseRow row;
    int label = static_cast<int>(rng.bounded(2));
    for (std::uint32_t c = 0; c < dim; ++c) {
      double p = label == 1 ? (c < dim / 2 ? 0.6 : 0.2) : (c < dim / 2 ? 0.2 : 0.6);
      if (rng.bernoulli(p)) row.cells.emplace_back(c, 1.0);
    }
    ds.X.rows.push_back(std::move(row));
    ds.y.push_back(label);
    ds.ids.push_back(std::to_string(i));
  }
  return ds;
}

}  // namespace

TEST_CASE("lsvm separates separable clusters perfectly") {
  Dataset ds = separable_clusters();
  ModelConfig cfg;
  cfg.kind = ModelKind::kLsvm;
  cfg.seed = 5;
  TrainedModel m = train(cfg, ds);
  std::vector<double> scores = predict(m, ds.X);
  double min_mal = 1e18, max_ben = -1e18;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (ds.y[i] == 1) min_mal = std::min(min_mal, scores[i]);
    else max_ben = std::max(max_ben, scores[i]);
  }
  CHECK(min_mal > max_ben);  // training accuracy 1.0 at some threshold
}

TEST_CASE("lsvm sign pattern survives row duplication") {
  Dataset ds = separable_clusters();
  Dataset doubled = ds;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    doubled.X.rows.push_back(ds.X.rows[i]);
    doubled.y.push_back(ds.y[i]);
    doubled.ids.push_back(ds.ids[i] + "+");
  }
  ModelConfig cfg;
  cfg.kind = ModelKind::kLsvm;
  cfg.seed = 11;
  auto s1 = predict(train(cfg, ds), ds.X);
  auto s2 = predict(train(cfg, doubled), ds.X);
  for (std::size_t i = 0; i < s1.size(); ++i)
    CHECK((s1[i] > 0) == (s2[i] > 0));
}

TEST_CASE("nn learns xor") {
  DenseMatrix X = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<int> y = {0, 1, 1, 0};
  NnConfig cfg;
  cfg.hidden = {4};
  cfg.epochs = 5000;
  cfg.batch = 4;
  cfg.learning_rate = 0.05;
  NnModel m = train_nn(cfg, X, y, 3);
  CHECK(nn_loss(m, X, y) < 0.1);
}

TEST_CASE("nn analytic gradients match central finite differences") {
  Rng rng(1234);
  DenseMatrix X;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    X.push_back({rng.next_signed(), rng.next_signed(), rng.next_signed()});
    y.push_back(static_cast<int>(rng.bounded(2)));
  }
  NnConfig cfg;
  cfg.hidden = {5, 3};
  NnModel m = init_nn(3, cfg, 17);
  NnGradients g = nn_gradients(m, X, y);

  const double h = 1e-4;
  double worst = 0.0;
  for (std::size_t l = 0; l < m.layers(); ++l) {
    for (std::size_t i = 0; i < m.weights[l].size(); ++i) {
      double saved = m.weights[l][i];
      m.weights[l][i] = saved + h;
      double up = nn_loss(m, X, y);
      m.weights[l][i] = saved - h;
      double down = nn_loss(m, X, y);
      m.weights[l][i] = saved;
      double numeric = (up - down) / (2 * h);
      double denom = std::max({std::abs(numeric), std::abs(g.weights[l][i]), 1e-8});
      worst = std::max(worst, std::abs(numeric - g.weights[l][i]) / denom);
    }
    for (std::size_t i = 0; i < m.biases[l].size(); ++i) {
      double saved = m.biases[l][i];
      m.biases[l][i] = saved + h;
      double up = nn_loss(m, X, y);
      m.biases[l][i] = saved - h;
      double down = nn_loss(m, X, y);
      m.biases[l][i] = saved;
      double numeric = (up - down) / (2 * h);
      double denom = std::max({std::abs(numeric), std::abs(g.biases[l][i]), 1e-8});
      worst = std::max(worst, std::abs(numeric - g.biases[l][i]) / denom);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("zero-weight nn outputs one half everywhere") {
  NnConfig cfg;
  cfg.hidden = {8};
  NnModel m = init_nn(4, cfg, 1);
  for (auto& w : m.weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : m.biases) std::fill(b.begin(), b.end(), 0.0);
  std::vector<double> pen = m.penultimate({0, 0, 0, 0});
  REQUIRE(pen.size() == 8);
  for (double v : pen) CHECK(v == 0.5);
  CHECK(m.score({0, 0, 0, 0}) == 0.5);
}

TEST_CASE("gbt training loss is non-increasing per round") {
  Dataset ds = random_binary(120, 30, 909);
  GbtConfig cfg;
  cfg.trees = 60;
  GbtModel m = train_gbt(cfg, ds);
  REQUIRE(m.train_loss.size() == 60);
  for (std::size_t i = 1; i < m.train_loss.size(); ++i)
    CHECK(m.train_loss[i] <= m.train_loss[i - 1] + 1e-12);
}

TEST_CASE("rf scores are vote fractions in [0,1] and deterministic") {
  Dataset ds = random_binary(80, 20, 313);
  ModelConfig cfg;
  cfg.kind = ModelKind::kRf;
  cfg.rf.trees = 50;
  cfg.seed = 99;
  auto s1 = predict(train(cfg, ds), ds.X);
  auto s2 = predict(train(cfg, ds), ds.X);
  CHECK(s1 == s2);
  for (double s : s1) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("train rejects single-class data, predict rejects bad shapes") {
  Dataset ds = separable_clusters();
  for (auto& yi : ds.y) yi = 1;
  ModelConfig cfg;
  CHECK_THROWS_AS(train(cfg, ds), TrainError);

  Dataset ok = separable_clusters();
  TrainedModel m = train(cfg, ok);
  FeatureMatrix wrong;
  wrong.cols = 5;
  wrong.rows.push_back({});
  CHECK_THROWS_AS(predict(m, wrong), ShapeError);
  CHECK_THROWS_AS(nn_penultimate(m, ok.X), KindError);
}

TEST_CASE("knn basics") {
  FeatureMatrix X;
  X.cols = 2;
  X.rows = {to_row(std::vector<double>{0, 0}), to_row(std::vector<double>{0, 1}),
            to_row(std::vector<double>{10, 10})};
  CHECK(knn_neighbors(X, 0, 1) == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(knn_neighbors(X, 0, 3), ConfigError);

  // duplicate of the query: self excluded, duplicate returned first
  FeatureMatrix D;
  D.cols = 2;
  D.rows = {to_row(std::vector<double>{1, 1}), to_row(std::vector<double>{1, 1}),
            to_row(std::vector<double>{2, 2})};
  CHECK(knn_neighbors(D, 0, 2) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("knn matches an all-pairs brute-force oracle on 500 points") {
  FeatureMatrix X;
  X.cols = 8;
  Rng rng(2718);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> p(8);
    for (auto& v : p) v = rng.bounded(16);  // coarse grid forces distance ties
    X.rows.push_back(to_row(p));
  }
  auto dense = [&](std::size_t i) { return to_dense(X.rows[i], 8); };
  Rng pick(555);
  for (int rep = 0; rep < 40; ++rep) {
    std::size_t q = pick.bounded(500);
    std::size_t k = 1 + pick.bounded(10);
    // oracle: full sort on (squared distance, row id)
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < 500; ++i) {
      if (i == q) continue;
      double d2 = 0.0;
      auto a = dense(q), b = dense(i);
      for (std::size_t c = 0; c < 8; ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
      all.emplace_back(d2, i);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < k; ++i) expected.push_back(all[i].second);
    CHECK(knn_neighbors(X, q, k) == expected);
  }
}

TEST_CASE("model containers round trip bit for bit") {
  Dataset sparse_ds = random_binary(60, 25, 112);
  Dataset dense_ds = separable_clusters();

  for (ModelKind kind : {ModelKind::kLsvm, ModelKind::kGbt, ModelKind::kRf}) {
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.gbt.trees = 20;
    cfg.rf.trees = 20;
    cfg.seed = 7;
    TrainedModel m = train(cfg, sparse_ds);
    TrainedModel back = load_model(save_model(m));
    CHECK(predict(back, sparse_ds.X) == predict(m, sparse_ds.X));
  }

  ModelConfig nn_cfg;
  nn_cfg.kind = ModelKind::kNn;
  nn_cfg.nn.hidden = {6, 3};
  nn_cfg.nn.epochs = 30;
  nn_cfg.seed = 7;
  TrainedModel m = train(nn_cfg, dense_ds);
  TrainedModel back = load_model(save_model(m));
  CHECK(predict(back, dense_ds.X) == predict(m, dense_ds.X));
  CHECK_THROWS_AS(load_model("BOGUS"), ParseError);
}

TEST_CASE("training is deterministic for every kind") {
  Dataset ds = random_binary(60, 25, 771);
  for (ModelKind kind : {ModelKind::kLsvm, ModelKind::kGbt, ModelKind::kRf}) {
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.gbt.trees = 15;
    cfg.rf.trees = 15;
    cfg.seed = 31;
    CHECK(predict(train(cfg, ds), ds.X) == predict(train(cfg, ds), ds.X));
  }
  ModelConfig nn_cfg;
  nn_cfg.kind = ModelKind::kNn;
  nn_cfg.nn.hidden = {4};
  nn_cfg.nn.epochs = 20;
  nn_cfg.seed = 31;
  Dataset dd = separable_clusters();
  CHECK(predict(train(nn_cfg, dd), dd.X) == predict(train(nn_cfg, dd), dd.X));
}
