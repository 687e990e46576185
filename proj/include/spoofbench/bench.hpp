#pragma once

// Experiment orchestration: stratified splits, repeated train/eval runs with
// optional attack and defense stages, and aggregation into the report schema.
// Every (level, repeat) cell is fully determined by (master seed, level index,
// repeat index), so cells can run on any number of workers in any order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spoofbench/annotator.hpp"
#include "spoofbench/attacks.hpp"
#include "spoofbench/corpus.hpp"
#include "spoofbench/dataset.hpp"
#include "spoofbench/defense.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/features.hpp"
#include "spoofbench/metrics.hpp"
#include "spoofbench/model.hpp"

namespace spoofbench {

enum class AttackKind : std::uint8_t { kNone, kDos, kIntegrity };

inline std::string attack_name(AttackKind a) {
  switch (a) {
    case AttackKind::kNone: return "none";
    case AttackKind::kDos: return "dos";
    case AttackKind::kIntegrity: return "integrity";
  }
  return "?";
}

struct ExperimentConfig {
  CorpusConfig corpus;
  std::string feature_set = "drebin";  // drebin | mamadroid
  std::vector<ModelConfig> models;
  AttackKind attack = AttackKind::kNone;
  std::vector<double> levels = {0.0};  // dos ratios or integrity variant counts
  DosAttackConfig dos;
  IntegrityAttackConfig integrity;
  bool defense_enabled = false;
  DefenseConfig defense;
  bool defense_auto_space = true;  // input space except for nn
  double split_fraction = 0.8;
  std::size_t repeats = 10;
  std::vector<double> fpr_targets = {0.001, 0.01};
  double frozen_tpr = 0.95;
  std::size_t projection_dim = 512;
  double projection_sparsity = 3.0;
  std::size_t engine_count = kDefaultEngineCount;
  std::size_t label_threshold = kDefaultLabelThreshold;
  bool calibrate_on_heldout = false;
  std::uint64_t master_seed = 0;
  std::size_t jobs = 1;
  std::map<std::string, std::string> echo;  // effective flat config
};

// Per-class proportions preserved within one sample; deterministic per seed.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<AppArchive>& apps, double fraction, Rng rng) {
  if (fraction <= 0.0 || fraction >= 1.0) throw SplitError("fraction outside (0,1)");
  std::vector<std::size_t> benign, malicious;
  for (std::size_t i = 0; i < apps.size(); ++i)
    (apps[i].true_label == Label::kBenign ? benign : malicious).push_back(i);
  if (benign.size() < 2 || malicious.size() < 2)
    throw SplitError("each class needs at least 2 apps");

  std::vector<std::size_t> train, test;
  for (auto* cls : {&benign, &malicious}) {
    rng.shuffle(*cls);
    std::size_t n_train =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(cls->size())));
    n_train = std::min(std::max<std::size_t>(n_train, 1), cls->size() - 1);
    for (std::size_t i = 0; i < cls->size(); ++i)
      (i < n_train ? train : test).push_back((*cls)[i]);
  }
  return {train, test};
}

// ---- report schema ---------------------------------------------------------

struct ReportRow {
  std::string model;
  std::string feature_set;
  std::string attack;
  double level = 0.0;
  double fpr_target = 0.0;
  double tpr_mean = 0.0;
  double tpr_std = 0.0;
  double fpr_at_frozen_tpr = 0.0;
  double auc_mean = 0.0;
  std::optional<double> asr;
  std::optional<double> pearson_r;
  std::optional<double> pearson_p;
};

struct RocRecord {
  std::string model;
  double level = 0.0;
  std::size_t repeat = 0;
  RocCurve roc;
};

struct ExperimentReport {
  std::map<std::string, std::string> config_echo;
  double frozen_tpr = 0.95;
  std::string feature_set;
  std::string attack;
  std::vector<ReportRow> rows;
  std::vector<RocRecord> rocs;
};

namespace bench_detail {

struct CleanAppData {
  DrebinFeatureSet drebin;
  SparseRow mamadroid;
  int annotator_label = 0;
};

struct PerModelMetrics {
  double auc = 0.0;
  double fpr_at_frozen = 0.0;
  std::vector<double> tpr_at;       // per fpr target
  std::vector<int> target_flipped;  // per fpr target; integrity runs only
  RocCurve roc;
};

struct CellResult {
  std::vector<PerModelMetrics> models;
  std::size_t poison_rows = 0;
};

struct Workspace {
  ExperimentConfig cfg;
  std::vector<AppArchive> apps;
  Ensemble ensemble;
  std::vector<MalwareCatalogEntry> catalog;
  std::vector<std::string> pool;              // callees available to clones
  std::vector<CleanAppData> clean;            // per corpus index
  std::map<std::string, std::size_t> id_to_idx;
  std::size_t target_idx = 0;                 // integrity target corpus index
};

inline SparseRow mamadroid_row(const AppArchive& app) {
  return to_row(extract_mamadroid(app, package_roots()));
}

inline std::uint32_t mamadroid_cols() {
  std::size_t n = markov_states(package_roots()).size();
  return static_cast<std::uint32_t>(n * n);
}

// Threshold-based rates evaluated on an explicit score set.
inline double rate_at_threshold(const std::vector<double>& scores, double thr) {
  std::size_t n = 0;
  for (double s : scores) n += s >= thr ? 1 : 0;
  return scores.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(scores.size());
}

struct EvalScores {
  std::vector<double> benign;
  std::vector<double> malicious;
  std::optional<double> target_score;
};

inline PerModelMetrics score_metrics(const EvalScores& ev, const ExperimentConfig& cfg,
                                     Rng cal_rng) {
  PerModelMetrics out;
  if (!cfg.calibrate_on_heldout) {
    out.roc = roc_curve(ev.benign, ev.malicious);
    out.auc = out.roc.auc;
    out.fpr_at_frozen = fpr_at_tpr(out.roc, cfg.frozen_tpr);
    for (double alpha : cfg.fpr_targets) {
      out.tpr_at.push_back(tpr_at_fpr(out.roc, alpha));
      if (ev.target_score) {
        double thr = threshold_at_fpr(out.roc, alpha);
        out.target_flipped.push_back(*ev.target_score >= thr ? 1 : 0);
      }
    }
    return out;
  }

  // Methodological-hygiene mode: thresholds fit on a held-out calibration
  // half of the test split, rates measured on the other half.
  auto split_half = [&](const std::vector<double>& v, std::vector<double>& cal,
                        std::vector<double>& eval_side) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    cal_rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < idx.size() / 2 ? cal : eval_side).push_back(v[idx[i]]);
  };
  std::vector<double> cal_b, eval_b, cal_m, eval_m;
  split_half(ev.benign, cal_b, eval_b);
  split_half(ev.malicious, cal_m, eval_m);
  RocCurve cal_roc = roc_curve(cal_b, cal_m);
  out.roc = roc_curve(eval_b, eval_m);
  out.auc = out.roc.auc;
  // Frozen-TPR threshold from calibration, FPR measured on eval benign.
  double frozen_thr = std::numeric_limits<double>::infinity();
  for (const auto& p : cal_roc.points)
    if (p.tpr >= cfg.frozen_tpr) {
      frozen_thr = p.threshold;
      break;
    }
  out.fpr_at_frozen = rate_at_threshold(eval_b, frozen_thr);
  for (double alpha : cfg.fpr_targets) {
    double thr = threshold_at_fpr(cal_roc, alpha);
    out.tpr_at.push_back(rate_at_threshold(eval_m, thr));
    if (ev.target_score)
      out.target_flipped.push_back(*ev.target_score >= thr ? 1 : 0);
  }
  return out;
}

// One experiment cell: split, attack, featurize, defend, train, score.
inline CellResult run_cell(const Workspace& ws, std::size_t level_idx,
                           std::size_t repeat) {
  const ExperimentConfig& cfg = ws.cfg;
  double level = cfg.levels[level_idx];
  Rng cell_rng = Rng(cfg.master_seed).split("repeat").split(repeat);
  auto [train_idx, test_idx] =
      stratified_split(ws.apps, cfg.split_fraction, cell_rng.split("split"));

  // Integrity runs keep the target on the test side: if the split put it in
  // training, swap it with the first benign test app.
  if (cfg.attack == AttackKind::kIntegrity) {
    auto in_train = std::find(train_idx.begin(), train_idx.end(), ws.target_idx);
    if (in_train != train_idx.end()) {
      for (std::size_t& t : test_idx) {
        if (ws.apps[t].true_label == Label::kBenign) {
          std::swap(*in_train, t);
          break;
        }
      }
    }
  }

  CellResult cell;

  // Assemble the training population (post-attack) and its annotator labels.
  std::vector<AppArchive> train_apps;
  train_apps.reserve(train_idx.size());
  for (std::size_t i : train_idx) train_apps.push_back(ws.apps[i]);
  std::map<std::string, int> attack_labels;

  if (cfg.attack == AttackKind::kDos && level > 0.0) {
    DosAttackConfig dcfg = cfg.dos;
    dcfg.ratio = level;
    dcfg.seed = cell_rng.split("dos").next_u64();
    DosResult res = spoof_dos(train_apps, dcfg, ws.catalog, ws.ensemble);
    cell.poison_rows = res.records.size();
    for (const auto& r : res.records) attack_labels[r.poisoned_id] = r.annotation.label;
    train_apps = std::move(res.apps);
  } else if (cfg.attack == AttackKind::kIntegrity && level > 0.0) {
    IntegrityAttackConfig icfg = cfg.integrity;
    icfg.variants = static_cast<std::size_t>(level);
    icfg.seed = cell_rng.split("integrity").next_u64();
    CloneResult res =
        make_clones(ws.apps[ws.target_idx], icfg, ws.pool, ws.catalog, ws.ensemble);
    cell.poison_rows = res.records.size();
    for (const auto& r : res.records) attack_labels[r.poisoned_id] = r.annotation.label;
    for (auto& c : res.clones) train_apps.push_back(std::move(c));
  }

  std::vector<int> y_train;
  y_train.reserve(train_apps.size());
  for (const auto& app : train_apps) {
    auto atk = attack_labels.find(app.id);
    if (atk != attack_labels.end()) {
      y_train.push_back(atk->second);
    } else {
      y_train.push_back(ws.clean[ws.id_to_idx.at(app.id)].annotator_label);
    }
  }

  std::vector<int> y_test;
  std::optional<std::size_t> target_pos;
  for (std::size_t k = 0; k < test_idx.size(); ++k) {
    y_test.push_back(ws.apps[test_idx[k]].true_label == Label::kMalicious ? 1 : 0);
    if (cfg.attack == AttackKind::kIntegrity && test_idx[k] == ws.target_idx)
      target_pos = k;
  }

  // Feature matrices. Clean apps use the precomputed cache; attack-produced
  // apps are extracted fresh.
  FeatureMatrix X_train, X_test;
  bool drebin = cfg.feature_set == "drebin";
  if (drebin) {
    std::vector<DrebinFeatureSet> fresh_sets(train_apps.size());
    std::vector<const DrebinFeatureSet*> train_sets(train_apps.size());
    for (std::size_t i = 0; i < train_apps.size(); ++i) {
      auto it = ws.id_to_idx.find(train_apps[i].id);
      if (it != ws.id_to_idx.end()) {
        train_sets[i] = &ws.clean[it->second].drebin;
      } else {
        fresh_sets[i] = extract_drebin(train_apps[i]);
        train_sets[i] = &fresh_sets[i];
      }
    }
    std::vector<DrebinFeatureSet> dict_input;
    dict_input.reserve(train_sets.size());
    for (const auto* s : train_sets) dict_input.push_back(*s);
    FeatureDictionary dict = build_dictionary(dict_input);

    X_train.cols = static_cast<std::uint32_t>(dict.size());
    X_train.binary = true;
    for (const auto* s : train_sets) X_train.rows.push_back(to_row(vectorize(*s, dict)));
    X_test.cols = X_train.cols;
    X_test.binary = true;
    for (std::size_t i : test_idx)
      X_test.rows.push_back(to_row(vectorize(ws.clean[i].drebin, dict)));
  } else {
    X_train.cols = X_test.cols = mamadroid_cols();
    for (std::size_t i = 0; i < train_apps.size(); ++i) {
      auto it = ws.id_to_idx.find(train_apps[i].id);
      X_train.rows.push_back(it != ws.id_to_idx.end() ? ws.clean[it->second].mamadroid
                                                      : mamadroid_row(train_apps[i]));
    }
    for (std::size_t i : test_idx) X_test.rows.push_back(ws.clean[i].mamadroid);
  }

  // Shared projection for the nn kind on high-dimensional binary features.
  std::optional<RandomProjection> projection;
  FeatureMatrix Xp_train, Xp_test;
  bool any_nn = false;
  for (const auto& m : cfg.models) any_nn |= m.kind == ModelKind::kNn;
  if (any_nn && drebin) {
    if (cfg.projection_dim < X_train.cols) {
      projection.emplace(X_train.cols, static_cast<std::uint32_t>(cfg.projection_dim),
                         cell_rng.split("projection").next_u64(), cfg.projection_sparsity);
      auto project_matrix = [&](const FeatureMatrix& X) {
        FeatureMatrix out;
        out.cols = static_cast<std::uint32_t>(cfg.projection_dim);
        out.binary = false;
        for (const auto& row : X.rows) {
          SparseBinaryVector v;
          v.dim = X.cols;
          for (const auto& [c, val] : row.cells) v.ones.push_back(c);
          out.rows.push_back(to_row(project(v, *projection)));
        }
        return out;
      };
      Xp_train = project_matrix(X_train);
      Xp_test = project_matrix(X_test);
    } else {
      Xp_train = X_train;  // dictionary already small; feed directly
      Xp_test = X_test;
      Xp_train.binary = Xp_test.binary = false;
    }
  }

  Dataset ds_base;
  ds_base.y = y_train;
  for (const auto& app : train_apps) ds_base.ids.push_back(app.id);

  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    ModelConfig mcfg = cfg.models[mi];
    mcfg.seed = cell_rng.split("model").split(mi).next_u64();
    bool use_projected = mcfg.kind == ModelKind::kNn && drebin;

    Dataset ds = ds_base;
    ds.X = use_projected ? Xp_train : X_train;
    const FeatureMatrix& X_eval = use_projected ? Xp_test : X_test;

    TrainedModel model;
    if (cfg.defense_enabled) {
      DefenseConfig dcfg = cfg.defense;
      if (cfg.defense_auto_space)
        dcfg.space = mcfg.kind == ModelKind::kNn ? DefenseSpace::kNnPenultimate
                                                 : DefenseSpace::kInputFeatures;
      model = defend_and_retrain(ds, dcfg, mcfg).model;
    } else {
      model = train(mcfg, ds);
    }

    std::vector<double> scores = predict(model, X_eval);
    EvalScores ev;
    for (std::size_t k = 0; k < scores.size(); ++k)
      (y_test[k] == 1 ? ev.malicious : ev.benign).push_back(scores[k]);
    if (target_pos) ev.target_score = scores[*target_pos];
    cell.models.push_back(
        score_metrics(ev, cfg, cell_rng.split("calibration").split(mi)));
  }
  return cell;
}

}  // namespace bench_detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       const std::vector<AppArchive>& corpus_apps) {
  if (cfg.repeats < 1) throw ConfigError("repeats must be >= 1");
  if (cfg.models.empty()) throw ConfigError("no models configured");
  if (cfg.levels.empty()) throw ConfigError("no attack levels configured");
  if (cfg.feature_set != "drebin" && cfg.feature_set != "mamadroid")
    throw ConfigError("unknown feature set: " + cfg.feature_set);

  bench_detail::Workspace ws{cfg, corpus_apps, {}, default_catalog(), {}, {}, {}, 0};

  std::vector<std::string> families;
  {
    std::set<std::string> fams;
    for (const auto& app : ws.apps)
      if (app.true_label == Label::kMalicious) fams.insert(app.group);
    families.assign(fams.begin(), fams.end());
  }
  ws.ensemble = build_ensemble(ws.catalog, families,
                               Rng(cfg.master_seed).split("ensemble").next_u64(),
                               cfg.engine_count);
  ws.pool = api_pool(cfg.corpus.api_pool_size);

  ws.clean.resize(ws.apps.size());
  for (std::size_t i = 0; i < ws.apps.size(); ++i) {
    ws.clean[i].drebin = extract_drebin(ws.apps[i]);
    ws.clean[i].mamadroid = bench_detail::mamadroid_row(ws.apps[i]);
    ws.clean[i].annotator_label =
        scan_and_annotate(ws.ensemble, ws.apps[i], cfg.label_threshold).label;
    ws.id_to_idx[ws.apps[i].id] = i;
  }

  if (cfg.attack == AttackKind::kIntegrity) {
    if (!cfg.integrity.target_id.empty()) {
      auto it = ws.id_to_idx.find(cfg.integrity.target_id);
      if (it == ws.id_to_idx.end())
        throw ConfigError("integrity target not in corpus: " + cfg.integrity.target_id);
      ws.target_idx = it->second;
    } else {
      std::vector<std::size_t> benign;
      for (std::size_t i = 0; i < ws.apps.size(); ++i)
        if (ws.apps[i].true_label == Label::kBenign) benign.push_back(i);
      Rng pick = Rng(cfg.master_seed).split("target");
      ws.target_idx = benign[pick.bounded(benign.size())];
    }
    if (ws.apps[ws.target_idx].true_label != Label::kBenign)
      throw ConfigError("integrity target must be benign");
  }

  // All (level, repeat) cells, parallel over a shared counter. Results land
  // in preallocated slots; aggregation below walks them in index order, so
  // the report is identical for any worker count.
  const std::size_t n_cells = cfg.levels.size() * cfg.repeats;
  std::vector<bench_detail::CellResult> cells(n_cells);
  std::vector<std::string> cell_errors(n_cells);
  std::atomic<std::size_t> next{0};
  std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
  auto worker = [&] {
    while (true) {
      std::size_t at = next.fetch_add(1);
      if (at >= n_cells) break;
      try {
        cells[at] = bench_detail::run_cell(ws, at / cfg.repeats, at % cfg.repeats);
      } catch (const std::exception& e) {
        cell_errors[at] = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (std::size_t at = 0; at < n_cells; ++at)
    if (!cell_errors[at].empty())
      throw Error("repeat " + std::to_string(at % cfg.repeats) + " at level " +
                  std::to_string(cfg.levels[at / cfg.repeats]) + ": " + cell_errors[at]);

  ExperimentReport report;
  report.config_echo = cfg.echo;
  report.frozen_tpr = cfg.frozen_tpr;
  report.feature_set = cfg.feature_set;
  report.attack = attack_name(cfg.attack);

  auto cell_at = [&](std::size_t level_idx, std::size_t repeat) -> const auto& {
    return cells[level_idx * cfg.repeats + repeat];
  };

  // Per (model, level): mean frozen-TPR FPR feeds the per-model trend test.
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    std::string model = kind_name(cfg.models[mi].kind);
    std::vector<double> level_fpr_means;
    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
      double s = 0.0;
      for (std::size_t r = 0; r < cfg.repeats; ++r)
        s += cell_at(li, r).models[mi].fpr_at_frozen;
      level_fpr_means.push_back(s / static_cast<double>(cfg.repeats));
    }
    std::optional<double> pr, pp;
    if (cfg.attack == AttackKind::kDos && cfg.levels.size() >= 3) {
      try {
        Correlation c = pearson(cfg.levels, level_fpr_means, 10000,
                                Rng(cfg.master_seed).split("pearson").split(mi).next_u64());
        pr = c.r;
        pp = c.p;
      } catch (const DegenerateInputError&) {
        // constant column; leave the fields empty
      }
    }

    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
      for (std::size_t fi = 0; fi < cfg.fpr_targets.size(); ++fi) {
        ReportRow row;
        row.model = model;
        row.feature_set = cfg.feature_set;
        row.attack = report.attack;
        row.level = cfg.levels[li];
        row.fpr_target = cfg.fpr_targets[fi];
        double mean = 0.0, m2 = 0.0, auc = 0.0;
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
          mean += cell_at(li, r).models[mi].tpr_at[fi];
          auc += cell_at(li, r).models[mi].auc;
        }
        mean /= static_cast<double>(cfg.repeats);
        auc /= static_cast<double>(cfg.repeats);
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
          double d = cell_at(li, r).models[mi].tpr_at[fi] - mean;
          m2 += d * d;
        }
        row.tpr_mean = mean;
        row.tpr_std = cfg.repeats > 1
                          ? std::sqrt(m2 / static_cast<double>(cfg.repeats - 1))
                          : 0.0;
        row.auc_mean = auc;
        row.fpr_at_frozen_tpr = level_fpr_means[li];
        if (cfg.attack == AttackKind::kIntegrity) {
          double hits = 0.0;
          for (std::size_t r = 0; r < cfg.repeats; ++r)
            hits += cell_at(li, r).models[mi].target_flipped.empty()
                        ? 0.0
                        : cell_at(li, r).models[mi].target_flipped[fi];
          row.asr = hits / static_cast<double>(cfg.repeats);
        }
        row.pearson_r = pr;
        row.pearson_p = pp;
        report.rows.push_back(std::move(row));
      }
      for (std::size_t r = 0; r < cfg.repeats; ++r)
        report.rocs.push_back(
            {model, cfg.levels[li], r, cell_at(li, r).models[mi].roc});
    }
  }
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, generate_corpus(cfg.corpus));
}

}  // namespace spoofbench
