// spoofbench — deterministic test bench for label-spoofing poisoning attacks
// on static Android-style malware classifiers.
//
// Subcommands map onto the pipeline stages: gen (corpus), inject (one payload
// into one app), scan (annotate apps), extract (feature matrices), train,
// attack dos|integrity (poison manifests + spoofed apps), defend (filter
// report), run (full experiment -> report), report (JSON -> CSV/SVG).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spoofbench/annotator.hpp"
#include "spoofbench/attacks.hpp"
#include "spoofbench/bench.hpp"
#include "spoofbench/catalog.hpp"
#include "spoofbench/corpus.hpp"
#include "spoofbench/defense.hpp"
#include "spoofbench/features.hpp"
#include "spoofbench/flatconfig.hpp"
#include "spoofbench/model.hpp"
#include "spoofbench/report.hpp"
#include "spoofbench/util.hpp"

namespace sb = spoofbench;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

class StageTimer {
public:
  void start(const std::string& name) {
    flush();
    current_ = name;
    t0_ = std::chrono::steady_clock::now();
  }
  void flush() {
    if (current_.empty()) return;
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0_)
                  .count();
    stages_.emplace_back(current_, static_cast<double>(ms));
    std::fprintf(stderr, "[spoofbench] %s: %lld ms\n", current_.c_str(),
                 static_cast<long long>(ms));
    current_.clear();
  }
  const std::vector<std::pair<std::string, double>>& stages() const { return stages_; }

private:
  std::string current_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<std::pair<std::string, double>> stages_;
};

struct ManifestSink {
  std::string command;
  std::uint64_t config_digest = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::string path;  // empty -> stderr

  void emit(const StageTimer& timer) const {
    nlohmann::ordered_json j;
    j["tool_version"] = kVersion;
    j["command"] = command;
    j["config_digest"] = sb::hex64(config_digest);
    j["master_seed"] = seed;
    j["stages"] = nlohmann::ordered_json::array();
    for (const auto& [name, ms] : timer.stages())
      j["stages"].push_back({{"name", name}, {"ms", ms}});
    j["outputs"] = outputs;
    if (path.empty()) {
      std::fprintf(stderr, "[spoofbench] manifest %s\n", j.dump().c_str());
    } else {
      sb::atomic_write(path, j.dump(2) + "\n");
    }
  }
};

sb::FlatConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return sb::FlatConfig::parse(sb::read_file(path));
}

std::vector<sb::ModelConfig> models_from_config(const sb::FlatConfig& cfg) {
  std::vector<sb::ModelConfig> models;
  for (const auto& name : cfg.get_strings("models", {"lsvm"})) {
    sb::ModelConfig m;
    m.kind = sb::kind_from_name(name);
    m.lsvm.lambda = cfg.get_double("model.lsvm.lambda", 1.0);
    m.lsvm.epochs = cfg.get_u64("model.lsvm.epochs", 50);
    m.gbt.trees = cfg.get_u64("model.gbt.trees", 300);
    m.gbt.depth = cfg.get_u64("model.gbt.depth", 3);
    m.gbt.learning_rate = cfg.get_double("model.gbt.learning_rate", 0.1);
    m.rf.trees = cfg.get_u64("model.rf.trees", 300);
    m.nn.epochs = cfg.get_u64("model.nn.epochs", 200);
    m.nn.batch = cfg.get_u64("model.nn.batch", 32);
    m.nn.learning_rate = cfg.get_double("model.nn.learning_rate", 1e-3);
    m.nn.hidden.clear();
    for (double w : cfg.get_doubles("model.nn.hidden", {64, 32, 16}))
      m.nn.hidden.push_back(static_cast<std::size_t>(w));
    models.push_back(std::move(m));
  }
  return models;
}

sb::CorpusConfig corpus_from_config(const sb::FlatConfig& cfg, std::uint64_t seed) {
  sb::CorpusConfig c;
  c.n_benign = cfg.get_u64("corpus.n_benign", 500);
  c.n_malicious = cfg.get_u64("corpus.n_malicious", 500);
  c.n_categories = cfg.get_u64("corpus.n_categories", 50);
  c.n_families = cfg.get_u64("corpus.n_families", 196);
  c.api_pool_size = cfg.get_u64("corpus.api_pool_size", 2700);
  c.repack_success_rate = cfg.get_double("corpus.repack_success_rate", 0.977);
  c.seed = sb::Rng(seed).split("corpus").next_u64();
  return c;
}

sb::ExperimentConfig experiment_from_config(const sb::FlatConfig& cfg,
                                            std::uint64_t seed, std::size_t jobs) {
  sb::ExperimentConfig e;
  e.master_seed = seed;
  e.jobs = jobs;
  e.corpus = corpus_from_config(cfg, seed);
  e.feature_set = cfg.get_string("features.set", "drebin");
  e.projection_dim = cfg.get_u64("features.projection.out_dim", 512);
  e.projection_sparsity = cfg.get_double("features.projection.sparsity", 3.0);
  e.models = models_from_config(cfg);

  std::string attack = cfg.get_string("attack.kind", "none");
  if (attack == "none") {
    e.attack = sb::AttackKind::kNone;
    e.levels = {0.0};
  } else if (attack == "dos") {
    e.attack = sb::AttackKind::kDos;
    e.levels = cfg.get_doubles("attack.dos.ratios", {0.0, 0.01, 0.02, 0.05, 0.10, 0.20});
    std::string policy = cfg.get_string("attack.dos.policy", "random");
    e.dos.policy = policy == "fixed" ? sb::PayloadPolicy::kFixedEntry
                                     : sb::PayloadPolicy::kRandomPerApp;
    e.dos.fixed_row = cfg.get_u64("attack.dos.fixed_row", 0);
    std::string mode = cfg.get_string("attack.dos.mode", "replace");
    e.dos.mode = mode == "append" ? sb::PoisonMode::kAppend : sb::PoisonMode::kReplace;
    if (cfg.has("attack.dos.budget")) e.dos.budget = cfg.get_u64("attack.dos.budget", 0);
    e.dos.inject_dir = cfg.get_string("attack.inject_dir", "res/");
  } else if (attack == "integrity") {
    e.attack = sb::AttackKind::kIntegrity;
    e.levels = cfg.get_doubles("attack.integrity.variants", {0, 5, 10, 50, 100});
    e.integrity.target_id = cfg.get_string("attack.integrity.target", "");
    e.integrity.n_add = cfg.get_u64("attack.integrity.n_add", 25);
    e.integrity.catalog_row = cfg.get_u64("attack.integrity.catalog_row", 0);
    e.integrity.inject_dir = cfg.get_string("attack.inject_dir", "res/");
  } else {
    throw sb::ConfigError("unknown attack kind: " + attack);
  }

  e.defense_enabled = cfg.get_bool("defense.enabled", false);
  e.defense.k = cfg.get_u64("defense.k", 3);
  std::string space = cfg.get_string("defense.space", "auto");
  if (space == "auto") {
    e.defense_auto_space = true;
  } else if (space == "input") {
    e.defense_auto_space = false;
    e.defense.space = sb::DefenseSpace::kInputFeatures;
  } else if (space == "penultimate") {
    e.defense_auto_space = false;
    e.defense.space = sb::DefenseSpace::kNnPenultimate;
  } else {
    throw sb::ConfigError("unknown defense space: " + space);
  }

  e.split_fraction = cfg.get_double("split.fraction", 0.8);
  e.repeats = cfg.get_u64("repeats", 10);
  e.fpr_targets = cfg.get_doubles("metrics.fpr_targets", {0.001, 0.01});
  e.frozen_tpr = cfg.get_double("metrics.frozen_tpr",
                                e.feature_set == "mamadroid" ? 0.90 : 0.95);
  e.calibrate_on_heldout = cfg.get_bool("metrics.calibrate_on_heldout", false);
  e.engine_count = cfg.get_u64("annotator.engines", sb::kDefaultEngineCount);
  e.label_threshold = cfg.get_u64("annotator.threshold", sb::kDefaultLabelThreshold);
  for (const auto& [k, v] : cfg.items()) e.echo[k] = v;
  e.echo["seed"] = std::to_string(seed);
  return e;
}

// ---- matrix file: SBMATRIX1 <set> <dim> <rows>, then id TAB cells ----------

std::string write_matrix_text(const std::string& feature_set, std::uint32_t dim,
                              const std::vector<std::string>& ids,
                              const std::vector<sb::SparseRow>& rows) {
  std::string out = "SBMATRIX1 " + feature_set + " " + std::to_string(dim) + " " +
                    std::to_string(rows.size()) + "\n";
  char buf[40];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += ids[i];
    out += '\t';
    if (feature_set == "drebin") {
      for (const auto& [c, v] : rows[i].cells) {
        out += std::to_string(c);
        out += ' ';
      }
    } else {
      for (const auto& [c, v] : rows[i].cells) {
        std::snprintf(buf, sizeof(buf), "%u:%a ", c, v);
        out += buf;
      }
    }
    if (out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

struct MatrixFile {
  std::string feature_set;
  sb::FeatureMatrix X;
  std::vector<std::string> ids;
};

MatrixFile read_matrix_text(const std::string& text) {
  MatrixFile mf;
  auto lines = sb::split_on(text, '\n');
  if (lines.empty()) throw sb::ParseError("empty matrix file");
  auto header = sb::split_on(lines[0], ' ');
  if (header.size() != 4 || header[0] != "SBMATRIX1")
    throw sb::ParseError("bad matrix header");
  mf.feature_set = header[1];
  mf.X.cols = static_cast<std::uint32_t>(std::stoul(header[2]));
  mf.X.binary = mf.feature_set == "drebin";
  std::size_t n_rows = std::stoul(header[3]);
  for (std::size_t i = 1; i < lines.size() && mf.ids.size() < n_rows; ++i) {
    if (lines[i].empty()) continue;
    auto tab = lines[i].find('\t');
    if (tab == std::string::npos) throw sb::ParseError("matrix row missing id field");
    mf.ids.push_back(lines[i].substr(0, tab));
    sb::SparseRow row;
    for (const auto& tok : sb::split_on(lines[i].substr(tab + 1), ' ')) {
      if (tok.empty()) continue;
      if (mf.X.binary) {
        row.cells.emplace_back(static_cast<std::uint32_t>(std::stoul(tok)), 1.0);
      } else {
        auto colon = tok.find(':');
        if (colon == std::string::npos) throw sb::ParseError("bad dense cell: " + tok);
        row.cells.emplace_back(static_cast<std::uint32_t>(std::stoul(tok.substr(0, colon))),
                               std::strtod(tok.c_str() + colon + 1, nullptr));
      }
    }
    mf.X.rows.push_back(std::move(row));
  }
  if (mf.X.rows.size() != n_rows) throw sb::ParseError("matrix row count mismatch");
  return mf;
}

std::map<std::string, int> labels_from_index(const fs::path& corpus_dir) {
  std::map<std::string, int> labels;
  for (const auto& line : sb::split_on(sb::read_file(corpus_dir / "index.tsv"), '\n')) {
    if (line.empty()) continue;
    auto fields = sb::split_on(line, '\t');
    if (fields.size() != 4) throw sb::ParseError("bad index record: " + line);
    labels[fields[0]] = fields[1] == "malicious" ? 1 : 0;
  }
  return labels;
}

std::string poison_manifest_text(const std::vector<sb::PoisonRecord>& records) {
  std::string out;
  for (const auto& r : records)
    out += r.source_id + "\t" + r.poisoned_id + "\t" + r.family + "\t" +
           std::to_string(r.annotation.detections) + "\t" +
           std::to_string(r.annotation.label) + "\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"label-spoofing poisoning test bench"};
  app.require_subcommand(1);

  std::string config_path, out_path, manifest_path;
  std::uint64_t seed = 0;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());

  // gen
  auto* gen = app.add_subcommand("gen", "generate a corpus directory");
  std::size_t gen_benign = 500, gen_malicious = 500;
  std::string gen_out;
  gen->add_option("--benign", gen_benign, "benign app count");
  gen->add_option("--malicious", gen_malicious, "malicious app count");
  gen->add_option("--config", config_path, "flat config file");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", seed, "master seed")->required();
  gen->add_option("--manifest", manifest_path, "run manifest path");

  // inject
  auto* inject = app.add_subcommand("inject", "inject one catalog payload into an app");
  std::string inj_app, inj_out, inj_dir = "res/";
  std::size_t inj_row = 0;
  inject->add_option("--app", inj_app, "input .apkz")->required();
  inject->add_option("--catalog-row", inj_row, "catalog row index 0..9")->required();
  inject->add_option("--dir", inj_dir, "injection root");
  inject->add_option("--out", inj_out, "output .apkz")->required();
  inject->add_option("--seed", seed, "master seed")->required();
  inject->add_option("--manifest", manifest_path, "run manifest path");

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "annotate apps with the AV ensemble");
  std::string scan_corpus;
  std::vector<std::string> scan_files;
  scan_cmd->add_option("--corpus", scan_corpus, "corpus directory (for families)");
  scan_cmd->add_option("files", scan_files, "extra .apkz files to scan");
  scan_cmd->add_option("--seed", seed, "master seed")->required();
  scan_cmd->add_option("--manifest", manifest_path, "run manifest path");

  // extract
  auto* extract = app.add_subcommand("extract", "write a feature matrix file");
  std::string ext_corpus, ext_set = "drebin", ext_out;
  extract->add_option("--corpus", ext_corpus, "corpus directory")->required();
  extract->add_option("--features", ext_set, "drebin|mamadroid");
  extract->add_option("--out", ext_out, "matrix file")->required();
  extract->add_option("--seed", seed, "master seed")->required();
  extract->add_option("--manifest", manifest_path, "run manifest path");

  // train
  auto* train_cmd = app.add_subcommand("train", "train one model from a matrix file");
  std::string tr_matrix, tr_index, tr_model = "lsvm", tr_out;
  train_cmd->add_option("--matrix", tr_matrix, "matrix file")->required();
  train_cmd->add_option("--index", tr_index, "corpus dir with index.tsv for labels")
      ->required();
  train_cmd->add_option("--model", tr_model, "lsvm|gbt|rf|nn");
  train_cmd->add_option("--config", config_path, "flat config file");
  train_cmd->add_option("--out", tr_out, "model file")->required();
  train_cmd->add_option("--seed", seed, "master seed")->required();
  train_cmd->add_option("--manifest", manifest_path, "run manifest path");

  // attack
  auto* attack = app.add_subcommand("attack", "stage a poisoning attack");
  attack->require_subcommand(1);
  auto* dos = attack->add_subcommand("dos", "label-spoof a slice of benign apps");
  std::string dos_corpus, dos_outdir, dos_manifest_out = "poison.tsv";
  double dos_ratio = 0.01;
  dos->add_option("--corpus", dos_corpus, "corpus directory")->required();
  dos->add_option("--ratio", dos_ratio, "poisoning ratio p");
  dos->add_option("--out-dir", dos_outdir, "directory for spoofed apps")->required();
  dos->add_option("--poison-manifest", dos_manifest_out, "poison record file");
  dos->add_option("--config", config_path, "flat config file");
  dos->add_option("--seed", seed, "master seed")->required();
  dos->add_option("--manifest", manifest_path, "run manifest path");

  auto* integrity = attack->add_subcommand("integrity", "surround one benign target");
  std::string int_corpus, int_outdir, int_target, int_manifest_out = "poison.tsv";
  std::size_t int_q = 5;
  integrity->add_option("--corpus", int_corpus, "corpus directory")->required();
  integrity->add_option("--target", int_target, "target app id")->required();
  integrity->add_option("--variants", int_q, "clone count q");
  integrity->add_option("--out-dir", int_outdir, "directory for clone apps")->required();
  integrity->add_option("--poison-manifest", int_manifest_out, "poison record file");
  integrity->add_option("--config", config_path, "flat config file");
  integrity->add_option("--seed", seed, "master seed")->required();
  integrity->add_option("--manifest", manifest_path, "run manifest path");

  // defend
  auto* defend = app.add_subcommand("defend", "run the deep-knn filter on a matrix");
  std::string def_matrix, def_index, def_out;
  std::size_t def_k = 3;
  defend->add_option("--matrix", def_matrix, "matrix file")->required();
  defend->add_option("--index", def_index, "corpus dir with index.tsv for labels")
      ->required();
  defend->add_option("--k", def_k, "neighbor count");
  defend->add_option("--out", def_out, "filter record file")->required();
  defend->add_option("--seed", seed, "master seed")->required();
  defend->add_option("--manifest", manifest_path, "run manifest path");

  // run
  auto* run = app.add_subcommand("run", "full experiment from a config file");
  std::string run_csv, run_svg_dir, run_roc_dir;
  run->add_option("--config", config_path, "flat config file")->required();
  run->add_option("--out", out_path, "report JSON path")->required();
  run->add_option("--csv", run_csv, "also write the CSV mirror");
  run->add_option("--svg-dir", run_svg_dir, "also write SVG plots");
  run->add_option("--roc-dir", run_roc_dir, "also write per-repeat ROC CSVs");
  run->add_option("--jobs", jobs, "worker pool size");
  run->add_option("--seed", seed, "master seed")->required();
  run->add_option("--manifest", manifest_path, "run manifest path");

  // report
  auto* rep = app.add_subcommand("report", "derive CSV/SVG from a report JSON");
  std::string rep_in, rep_csv, rep_svg_dir;
  rep->add_option("--in", rep_in, "report JSON")->required();
  rep->add_option("--csv", rep_csv, "CSV output path");
  rep->add_option("--svg-dir", rep_svg_dir, "SVG output directory");
  rep->add_option("--manifest", manifest_path, "run manifest path");

  CLI11_PARSE(app, argc, argv);

  StageTimer timer;
  ManifestSink manifest;
  manifest.seed = seed;
  manifest.path = manifest_path;

  try {
    sb::FlatConfig cfg = load_config(config_path);
    manifest.config_digest = cfg.digest();

    if (*gen) {
      manifest.command = "gen";
      sb::CorpusConfig ccfg = corpus_from_config(cfg, seed);
      if (gen->count("--benign")) ccfg.n_benign = gen_benign;
      if (gen->count("--malicious")) ccfg.n_malicious = gen_malicious;
      timer.start("generate");
      auto apps = sb::generate_corpus(ccfg);
      timer.start("write");
      sb::save_corpus(gen_out, apps);
      timer.flush();
      manifest.outputs = {gen_out};
    } else if (*inject) {
      manifest.command = "inject";
      timer.start("inject");
      sb::Archive ar = sb::parse_archive(sb::read_file_bytes(inj_app));
      const auto& catalog = sb::default_catalog();
      sb::Archive out = sb::inject_entry(ar, catalog.at(inj_row), inj_dir, seed);
      sb::atomic_write(inj_out, sb::write_archive(out));
      timer.flush();
      manifest.outputs = {inj_out};
    } else if (*scan_cmd) {
      manifest.command = "scan";
      timer.start("scan");
      std::vector<sb::AppArchive> apps;
      std::vector<std::string> fams;
      if (!scan_corpus.empty()) {
        apps = sb::load_corpus(scan_corpus);
        std::set<std::string> f;
        for (const auto& a : apps)
          if (a.true_label == sb::Label::kMalicious) f.insert(a.group);
        fams.assign(f.begin(), f.end());
      }
      for (const auto& file : scan_files) {
        sb::AppArchive a;
        a.id = fs::path(file).stem().string();
        a.archive = sb::parse_archive(sb::read_file_bytes(file));
        apps.push_back(std::move(a));
      }
      sb::Ensemble ens = sb::build_ensemble(
          sb::default_catalog(), fams, sb::Rng(seed).split("ensemble").next_u64(),
          cfg.get_u64("annotator.engines", sb::kDefaultEngineCount));
      std::size_t thr = cfg.get_u64("annotator.threshold", sb::kDefaultLabelThreshold);
      for (const auto& a : apps) {
        sb::ScanReport r;
        try {
          r = sb::scan(ens, a);
        } catch (const sb::Error& e) {
          throw sb::ScanError(a.id + ": " + e.what());
        }
        sb::Annotation ann = sb::annotate(ens, r, thr);
        std::printf("%s\t%zu\t%zu\t%d\t%s\n", a.id.c_str(), r.detections,
                    r.total_engines, ann.label,
                    ann.family ? ann.family->c_str() : "-");
      }
      timer.flush();
    } else if (*extract) {
      manifest.command = "extract";
      timer.start("load");
      auto apps = sb::load_corpus(ext_corpus);
      timer.start("extract");
      std::vector<std::string> ids;
      std::vector<sb::SparseRow> rows;
      std::uint32_t dim = 0;
      if (ext_set == "drebin") {
        std::vector<sb::DrebinFeatureSet> sets;
        for (const auto& a : apps) sets.push_back(sb::extract_drebin(a));
        sb::FeatureDictionary dict = sb::build_dictionary(sets);
        dim = static_cast<std::uint32_t>(dict.size());
        for (std::size_t i = 0; i < apps.size(); ++i) {
          ids.push_back(apps[i].id);
          rows.push_back(sb::to_row(sb::vectorize(sets[i], dict)));
        }
      } else if (ext_set == "mamadroid") {
        dim = sb::bench_detail::mamadroid_cols();
        for (const auto& a : apps) {
          ids.push_back(a.id);
          rows.push_back(sb::bench_detail::mamadroid_row(a));
        }
      } else {
        throw sb::ConfigError("unknown feature set: " + ext_set);
      }
      timer.start("write");
      sb::atomic_write(ext_out, write_matrix_text(ext_set, dim, ids, rows));
      timer.flush();
      manifest.outputs = {ext_out};
    } else if (*train_cmd) {
      manifest.command = "train";
      timer.start("load");
      MatrixFile mf = read_matrix_text(sb::read_file(tr_matrix));
      auto labels = labels_from_index(tr_index);
      sb::Dataset ds;
      ds.X = std::move(mf.X);
      ds.ids = mf.ids;
      for (const auto& id : ds.ids) {
        auto it = labels.find(id);
        if (it == labels.end()) throw sb::ConfigError("no label for app " + id);
        ds.y.push_back(it->second);
      }
      sb::FlatConfig mcfg_src = cfg;
      mcfg_src.set("models", tr_model);
      sb::ModelConfig mcfg = models_from_config(mcfg_src).at(0);
      mcfg.seed = sb::Rng(seed).split("train").next_u64();
      timer.start("train");
      sb::TrainedModel model = sb::train(mcfg, ds);
      timer.start("write");
      sb::atomic_write(tr_out, sb::save_model(model));
      timer.flush();
      manifest.outputs = {tr_out};
    } else if (*dos) {
      manifest.command = "attack dos";
      timer.start("load");
      auto apps = sb::load_corpus(dos_corpus);
      std::set<std::string> f;
      for (const auto& a : apps)
        if (a.true_label == sb::Label::kMalicious) f.insert(a.group);
      sb::Ensemble ens = sb::build_ensemble(
          sb::default_catalog(), {f.begin(), f.end()},
          sb::Rng(seed).split("ensemble").next_u64(),
          cfg.get_u64("annotator.engines", sb::kDefaultEngineCount));
      timer.start("attack");
      sb::DosAttackConfig acfg;
      acfg.ratio = dos_ratio;
      acfg.seed = sb::Rng(seed).split("dos").next_u64();
      acfg.inject_dir = cfg.get_string("attack.inject_dir", "res/");
      sb::DosResult res = sb::spoof_dos(apps, acfg, sb::default_catalog(), ens);
      timer.start("write");
      fs::create_directories(dos_outdir);
      for (const auto& r : res.records) {
        for (const auto& a : res.apps)
          if (a.id == r.poisoned_id)
            sb::atomic_write(fs::path(dos_outdir) / (a.id + ".apkz"),
                             sb::write_archive(a.archive));
      }
      sb::atomic_write(dos_manifest_out, poison_manifest_text(res.records));
      timer.flush();
      manifest.outputs = {dos_outdir, dos_manifest_out};
    } else if (*integrity) {
      manifest.command = "attack integrity";
      timer.start("load");
      auto apps = sb::load_corpus(int_corpus);
      std::set<std::string> f;
      for (const auto& a : apps)
        if (a.true_label == sb::Label::kMalicious) f.insert(a.group);
      sb::Ensemble ens = sb::build_ensemble(
          sb::default_catalog(), {f.begin(), f.end()},
          sb::Rng(seed).split("ensemble").next_u64(),
          cfg.get_u64("annotator.engines", sb::kDefaultEngineCount));
      const sb::AppArchive* target = nullptr;
      for (const auto& a : apps)
        if (a.id == int_target) target = &a;
      if (!target) throw sb::ConfigError("target not in corpus: " + int_target);
      timer.start("attack");
      sb::IntegrityAttackConfig acfg;
      acfg.target_id = int_target;
      acfg.variants = int_q;
      acfg.n_add = cfg.get_u64("attack.integrity.n_add", 25);
      acfg.catalog_row = cfg.get_u64("attack.integrity.catalog_row", 0);
      acfg.seed = sb::Rng(seed).split("integrity").next_u64();
      auto pool = sb::api_pool(cfg.get_u64("corpus.api_pool_size", 2700));
      sb::CloneResult res =
          sb::make_clones(*target, acfg, pool, sb::default_catalog(), ens);
      timer.start("write");
      fs::create_directories(int_outdir);
      for (const auto& c : res.clones)
        sb::atomic_write(fs::path(int_outdir) / (c.id + ".apkz"),
                         sb::write_archive(c.archive));
      sb::atomic_write(int_manifest_out, poison_manifest_text(res.records));
      timer.flush();
      manifest.outputs = {int_outdir, int_manifest_out};
    } else if (*defend) {
      manifest.command = "defend";
      timer.start("load");
      MatrixFile mf = read_matrix_text(sb::read_file(def_matrix));
      auto labels = labels_from_index(def_index);
      std::vector<int> y;
      for (const auto& id : mf.ids) {
        auto it = labels.find(id);
        if (it == labels.end()) throw sb::ConfigError("no label for app " + id);
        y.push_back(it->second);
      }
      timer.start("filter");
      sb::DefenseConfig dcfg;
      dcfg.k = def_k;
      sb::FilterResult fr = sb::deep_knn_filter(mf.X, y, dcfg);
      timer.start("write");
      std::string out;
      std::vector<char> kept(mf.ids.size(), 0);
      for (std::size_t i : fr.kept) kept[i] = 1;
      for (std::size_t i = 0; i < mf.ids.size(); ++i)
        out += mf.ids[i] + "\t" + std::to_string(y[i]) + "\t" +
               std::to_string(fr.tallies[i].label0) + "\t" +
               std::to_string(fr.tallies[i].label1) + "\t" +
               (kept[i] ? "kept" : "removed") + "\n";
      sb::atomic_write(def_out, out);
      timer.flush();
      manifest.outputs = {def_out};
    } else if (*run) {
      manifest.command = "run";
      sb::ExperimentConfig ecfg = experiment_from_config(cfg, seed, jobs);
      timer.start("experiment");
      sb::ExperimentReport report = sb::run_experiment(ecfg);
      timer.start("write");
      sb::atomic_write(out_path, sb::report_to_json(report).dump(2) + "\n");
      manifest.outputs = {out_path};
      if (!run_csv.empty()) {
        sb::atomic_write(run_csv, sb::report_to_csv(report));
        manifest.outputs.push_back(run_csv);
      }
      if (!run_roc_dir.empty()) {
        sb::write_roc_csvs(report, run_roc_dir);
        manifest.outputs.push_back(run_roc_dir);
      }
      if (!run_svg_dir.empty()) {
        sb::write_svg_plots(report, run_svg_dir);
        manifest.outputs.push_back(run_svg_dir);
      }
      timer.flush();
    } else if (*rep) {
      manifest.command = "report";
      timer.start("load");
      auto j = nlohmann::ordered_json::parse(sb::read_file(rep_in));
      sb::ExperimentReport report;
      report.feature_set = j.value("feature_set", "");
      report.attack = j.value("attack", "");
      report.frozen_tpr = j.value("frozen_tpr", 0.95);
      for (const auto& row : j["rows"]) {
        sb::ReportRow r;
        r.model = row["model"];
        r.feature_set = row["feature_set"];
        r.attack = row["attack"];
        r.level = row["level"];
        r.fpr_target = row["fpr_target"];
        r.tpr_mean = row["tpr_mean"];
        r.tpr_std = row["tpr_std"];
        r.fpr_at_frozen_tpr = row["fpr_at_frozen_tpr"];
        r.auc_mean = row["auc_mean"];
        if (!row["asr"].is_null()) r.asr = row["asr"].get<double>();
        if (!row["pearson_r"].is_null()) r.pearson_r = row["pearson_r"].get<double>();
        if (!row["pearson_p"].is_null()) r.pearson_p = row["pearson_p"].get<double>();
        report.rows.push_back(std::move(r));
      }
      timer.start("write");
      if (!rep_csv.empty()) {
        sb::atomic_write(rep_csv, sb::report_to_csv(report));
        manifest.outputs.push_back(rep_csv);
      }
      if (!rep_svg_dir.empty()) {
        sb::write_svg_plots(report, rep_svg_dir);
        manifest.outputs.push_back(rep_svg_dir);
      }
      timer.flush();
    }
  } catch (const sb::Error& e) {
    timer.flush();
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    timer.flush();
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  manifest.emit(timer);
  return 0;
}
