#pragma once

// The two poisoning goals on top of label spoofing. The DoS path injects a
// catalog payload into a sampled slice of the repackable benign training apps
// and lets the annotator flip their labels; the integrity path surrounds one
// benign target with label-spoofed clones diversified by dead guarded calls.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spoofbench/annotator.hpp"
#include "spoofbench/catalog.hpp"
#include "spoofbench/corpus.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/features.hpp"
#include "spoofbench/rng.hpp"

namespace spoofbench {

enum class PayloadPolicy : std::uint8_t { kRandomPerApp, kFixedEntry };
enum class PoisonMode : std::uint8_t { kReplace, kAppend };

struct DosAttackConfig {
  double ratio = 0.01;                       // p
  std::optional<std::size_t> budget;         // epsilon
  PayloadPolicy policy = PayloadPolicy::kRandomPerApp;
  std::size_t fixed_row = 0;
  PoisonMode mode = PoisonMode::kReplace;
  std::string inject_dir = "res/";
  std::uint64_t seed = 0;
};

struct IntegrityAttackConfig {
  std::string target_id;
  std::size_t variants = 5;   // q
  std::size_t n_add = 25;     // guarded calls per clone
  std::size_t catalog_row = 0;
  std::string inject_dir = "res/";
  std::uint64_t seed = 0;
};

struct PoisonRecord {
  std::string source_id;
  std::string poisoned_id;
  std::string family;
  Annotation annotation;
};

struct DosResult {
  std::vector<AppArchive> apps;       // poisoned training population
  std::vector<PoisonRecord> records;
  std::vector<std::string> skipped;   // non-repackable draws that were redrawn
};

inline DosResult spoof_dos(const std::vector<AppArchive>& training,
                           const DosAttackConfig& cfg,
                           const std::vector<MalwareCatalogEntry>& catalog,
                           const Ensemble& ensemble) {
  if (cfg.ratio < 0.0 || cfg.ratio > 1.0) throw ConfigError("dos ratio outside [0,1]");
  if (catalog.empty()) throw ConfigError("empty payload catalog");

  std::vector<std::size_t> benign_idx;
  for (std::size_t i = 0; i < training.size(); ++i)
    if (training[i].true_label == Label::kBenign) benign_idx.push_back(i);

  // p percent of the training set, drawn from its repackable benign apps
  // (p=1% of an 800-app split poisons 8 apps).
  std::size_t count =
      static_cast<std::size_t>(cfg.ratio * static_cast<double>(training.size()));
  if (cfg.budget) count = std::min(count, *cfg.budget);

  // Uniform selection with redraw on non-repackable apps: walk a seeded
  // shuffle of the benign pool and keep the first `count` repackable ones.
  Rng rng = Rng(cfg.seed).split("dos-select");
  rng.shuffle(benign_idx);
  DosResult out;
  out.apps = training;
  std::vector<std::size_t> chosen;
  for (std::size_t i : benign_idx) {
    if (chosen.size() == count) break;
    if (!training[i].repackable) {
      out.skipped.push_back(training[i].id);
      continue;
    }
    chosen.push_back(i);
  }
  if (chosen.size() < count)
    throw AttackError("repackable benign pool exhausted: wanted " +
                      std::to_string(count) + ", found " +
                      std::to_string(chosen.size()));

  for (std::size_t k = 0; k < chosen.size(); ++k) {
    std::size_t idx = chosen[k];
    const AppArchive& src = training[idx];
    Rng app_rng = Rng(cfg.seed).split("dos-app").split(k);
    const MalwareCatalogEntry& payload =
        cfg.policy == PayloadPolicy::kFixedEntry
            ? catalog.at(cfg.fixed_row)
            : catalog[app_rng.bounded(catalog.size())];

    AppArchive poisoned = src;
    poisoned.id = src.id + ".sp";
    poisoned.archive =
        inject_entry(src.archive, payload, cfg.inject_dir, app_rng.next_u64());
    poisoned = repack(poisoned);

    Annotation ann = scan_and_annotate(ensemble, poisoned);
    out.records.push_back({src.id, poisoned.id, payload.family, ann});
    if (cfg.mode == PoisonMode::kReplace) out.apps[idx] = std::move(poisoned);
    else out.apps.push_back(std::move(poisoned));
  }
  return out;
}

struct CloneResult {
  std::vector<AppArchive> clones;
  std::vector<PoisonRecord> records;
};

// q label-spoofed near-duplicates of the target. Each clone appends one fresh
// method of guarded (dynamically dead) calls — a few callees new to the
// target's feature set, the rest re-mentions of its own — plus the catalog
// payload, keeping every clone within Jaccard distance 0.2 of the target.
inline CloneResult make_clones(const AppArchive& target, const IntegrityAttackConfig& cfg,
                               const std::vector<std::string>& pool,
                               const std::vector<MalwareCatalogEntry>& catalog,
                               const Ensemble& ensemble) {
  if (target.true_label != Label::kBenign)
    throw AttackError("integrity target must be benign: " + target.id);
  if (cfg.variants < 1) throw ConfigError("variant count must be >= 1");
  if (pool.empty()) throw ConfigError("empty api pool");
  const MalwareCatalogEntry& payload = catalog.at(cfg.catalog_row);

  DrebinFeatureSet target_fs = extract_drebin(target);
  std::vector<std::string> target_callees;
  {
    const ArchiveEntry* dx = target.archive.find("classes.dexl");
    DexLiteProgram dex = parse_dexlite(to_string(dx->bytes));
    std::set<std::string> seen;
    for (const auto& m : dex.methods)
      for (const auto& s : m.statements)
        if (s.kind == DexStatement::Kind::kCall && is_external_callee(s.text) &&
            seen.insert(s.text).second)
          target_callees.push_back(s.text);
  }

  std::vector<std::string> fresh_pool;
  for (const auto& callee : pool)
    if (!target_fs.count("api::" + callee)) fresh_pool.push_back(callee);

  // New-callee count per clone: small enough that |new| / (|T| + |new|) <= 0.2.
  std::size_t n_new = std::min(cfg.n_add, std::max<std::size_t>(1, target_fs.size() / 5));
  if (static_cast<double>(n_new) / static_cast<double>(target_fs.size() + n_new) > 0.2)
    throw AttackError("target feature set too small to stay within the surround radius");
  if (fresh_pool.size() < n_new)
    throw AttackError("api pool cannot diversify clones: 0 achievable variants");

  Rng rng = Rng(cfg.seed).split("clones");
  std::set<std::vector<std::size_t>> used_subsets;
  CloneResult out;
  const std::size_t max_attempts = 200 * cfg.variants + 1000;
  std::size_t attempts = 0;

  for (std::size_t j = 0; j < cfg.variants; ++j) {
    std::vector<std::size_t> subset;
    while (true) {
      if (++attempts > max_attempts)
        throw AttackError("cannot achieve " + std::to_string(cfg.variants) +
                          " distinct variants; achievable maximum is " +
                          std::to_string(out.clones.size()));
      subset = rng.sample_indices(fresh_pool.size(), n_new);
      std::sort(subset.begin(), subset.end());
      if (used_subsets.insert(subset).second) break;
    }

    const ArchiveEntry* dx = target.archive.find("classes.dexl");
    DexLiteProgram dex = parse_dexlite(to_string(dx->bytes));
    DexMethod extra{"x" + std::to_string(j), {}};
    for (std::size_t s : subset)
      extra.statements.push_back(DexStatement::call(Guard::kGuarded, fresh_pool[s]));
    std::size_t filler = std::min(cfg.n_add - n_new, target_callees.size());
    for (std::size_t s : rng.sample_indices(target_callees.size(), filler))
      extra.statements.push_back(DexStatement::call(Guard::kGuarded, target_callees[s]));
    dex.methods.push_back(std::move(extra));

    AppArchive clone = target;
    clone.id = target.id + ".c" + std::to_string(j);
    clone.repackable = true;
    // Rebuild with the dex in its original slot to keep entry order stable.
    Archive rebuilt;
    for (const auto& e : target.archive.entries) {
      if (e.path == "classes.dexl")
        rebuilt.entries.emplace_back("classes.dexl", to_bytes(write_dexlite(dex)));
      else
        rebuilt.entries.push_back(e);
    }
    clone.archive = inject_entry(rebuilt, payload, cfg.inject_dir, rng.next_u64());
    clone = repack(clone);

    Annotation ann = scan_and_annotate(ensemble, clone);
    out.records.push_back({target.id, clone.id, payload.family, ann});
    out.clones.push_back(std::move(clone));
  }
  return out;
}

// Dynamic call order: unguarded external calls in method order, internal
// self.* calls expanded one level (their own unguarded externals spliced in,
// nested self-calls not followed). A self-call cycle truncates the expansion
// at a marker token.
inline std::vector<std::string> behavioral_trace(const AppArchive& app) {
  const ArchiveEntry* dx = app.archive.find("classes.dexl");
  if (!dx) throw ParseError("missing classes.dexl in " + app.id);
  DexLiteProgram dex = parse_dexlite(to_string(dx->bytes));

  std::vector<std::string> trace;
  for (const auto& m : dex.methods) {
    for (const auto& s : m.statements) {
      if (s.kind != DexStatement::Kind::kCall || s.guard == Guard::kGuarded) continue;
      if (is_external_callee(s.text)) {
        trace.push_back(s.text);
        continue;
      }
      std::string callee = s.text.substr(5);  // strip "self."
      if (callee == m.name) {
        trace.push_back("<cycle>");
        continue;
      }
      const DexMethod* inner = dex.find(callee);
      if (!inner) continue;
      bool truncated = false;
      for (const auto& is : inner->statements) {
        if (is.kind != DexStatement::Kind::kCall || is.guard == Guard::kGuarded) continue;
        if (is_external_callee(is.text)) {
          trace.push_back(is.text);
        } else {
          std::string nested = is.text.substr(5);
          if (nested == inner->name || nested == m.name) {
            trace.push_back("<cycle>");
            truncated = true;
            break;
          }
          // depth limit: nested self-calls are not expanded further
        }
      }
      if (truncated) continue;
    }
  }
  return trace;
}

}  // namespace spoofbench
