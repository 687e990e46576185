#pragma once

// The labeling oracle: an ensemble of signature-matching engines over entry
// content digests, a detection-count threshold, and a plurality family vote
// over vendor-decorated family strings.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "spoofbench/catalog.hpp"
#include "spoofbench/corpus.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/rng.hpp"
#include "spoofbench/util.hpp"

namespace spoofbench {

constexpr std::size_t kDefaultLabelThreshold = 4;  // label 1 iff detections > 4

struct AvEngine {
  std::string id;
  std::unordered_set<std::uint64_t> signature_db;
  std::unordered_map<std::uint64_t, std::string> family_alias;  // digest -> vendor string
};

struct Ensemble {
  std::vector<AvEngine> engines;
  std::unordered_map<std::string, std::string> alias_table;  // vendor string -> canonical
};

struct ScanReport {
  std::size_t detections = 0;
  std::size_t total_engines = 0;
  std::map<std::string, std::string> verdicts;  // engine id -> family string
};

struct Annotation {
  int label = 0;
  std::optional<std::string> family;
  std::size_t detections = 0;
};

namespace detail {

inline const std::vector<std::string>& vendor_prefixes() {
  static const std::vector<std::string> v = {"",        "Trojan.", "Gen.",
                                             "Android.", "Riskware.", "W32."};
  return v;
}

inline const std::vector<std::string>& vendor_suffixes() {
  static const std::vector<std::string> v = {"", ".A", ".B", ".C", "!gen", ".pak"};
  return v;
}

inline std::string decorate_family(const std::string& canonical, Rng rng) {
  const auto& pre = vendor_prefixes();
  const auto& suf = vendor_suffixes();
  return pre[rng.bounded(pre.size())] + canonical + suf[rng.bounded(suf.size())];
}

}  // namespace detail

// Builds the engine ensemble: catalog payload digests land in exactly the
// engines named by each entry's detection profile; every corpus family's
// marker digest lands in a seed-determined 20..61 of the engines. Vendor
// alias strings are decorated per (engine, family) and recorded in the
// normalization table the vote uses.
inline Ensemble build_ensemble(const std::vector<MalwareCatalogEntry>& catalog,
                               const std::vector<std::string>& corpus_families,
                               std::uint64_t seed,
                               std::size_t engine_count = kDefaultEngineCount) {
  Ensemble ens;
  ens.engines.resize(engine_count);
  for (std::size_t i = 0; i < engine_count; ++i) ens.engines[i].id = engine_id(i);
  std::unordered_map<std::string, std::size_t> engine_index;
  for (std::size_t i = 0; i < engine_count; ++i) engine_index[ens.engines[i].id] = i;

  Rng root = Rng(seed);
  auto add_signature = [&](std::size_t engine, std::uint64_t digest,
                           const std::string& canonical) {
    AvEngine& e = ens.engines[engine];
    e.signature_db.insert(digest);
    std::string alias = detail::decorate_family(
        canonical, root.split("alias").split(engine).split(fnv1a64(canonical)));
    e.family_alias[digest] = alias;
    ens.alias_table[alias] = canonical;
  };

  for (const auto& entry : catalog) {
    if (entry.detection_profile.size() > engine_count)
      throw ConfigError("detection profile for " + entry.family +
                        " exceeds ensemble size");
    std::uint64_t digest = content_digest(entry.bytes);
    for (const auto& eid : entry.detection_profile) {
      auto it = engine_index.find(eid);
      if (it == engine_index.end())
        throw ConfigError("unknown engine id in detection profile: " + eid);
      add_signature(it->second, digest, entry.family);
    }
  }

  for (const auto& fam : corpus_families) {
    std::uint64_t digest = content_digest(family_marker_bytes(fam));
    Rng frng = root.split("fam-det").split(fnv1a64(fam));
    std::size_t span = engine_count > 20 ? engine_count - 20 + 1 : 1;
    std::size_t count = std::min<std::size_t>(20 + frng.bounded(span), engine_count);
    for (std::size_t i : frng.sample_indices(engine_count, count))
      add_signature(i, digest, fam);
  }
  return ens;
}

// Unpacks every entry and matches digests against each engine's DB. An
// engine fires once per app no matter how many entries match; its verdict
// names the first matching entry in archive order.
inline ScanReport scan(const Ensemble& ens, const Archive& archive) {
  std::vector<std::uint64_t> digests;
  digests.reserve(archive.entries.size());
  for (const auto& e : archive.entries) digests.push_back(content_digest(e.bytes));

  ScanReport rep;
  rep.total_engines = ens.engines.size();
  for (const auto& eng : ens.engines) {
    for (std::uint64_t d : digests) {
      if (!eng.signature_db.count(d)) continue;
      rep.verdicts[eng.id] = eng.family_alias.at(d);
      break;
    }
  }
  rep.detections = rep.verdicts.size();
  return rep;
}

inline ScanReport scan(const Ensemble& ens, const AppArchive& app) {
  return scan(ens, app.archive);
}

// Plurality canonical family over normalized verdicts; lexicographic
// tie-break; empty when nothing fired.
inline std::optional<std::string> family_vote(const Ensemble& ens,
                                              const ScanReport& report) {
  std::map<std::string, std::size_t> tally;
  for (const auto& [eid, alias] : report.verdicts) {
    auto it = ens.alias_table.find(alias);
    const std::string& canonical = it != ens.alias_table.end() ? it->second : alias;
    ++tally[canonical];
  }
  if (tally.empty()) return std::nullopt;
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it)
    if (it->second > best->second) best = it;  // map order = lexicographic
  return best->first;
}

inline Annotation annotate(const Ensemble& ens, const ScanReport& report,
                           std::size_t label_threshold = kDefaultLabelThreshold) {
  Annotation ann;
  ann.detections = report.detections;
  ann.label = report.detections > label_threshold ? 1 : 0;
  if (ann.label == 1) ann.family = family_vote(ens, report);
  return ann;
}

inline Annotation scan_and_annotate(const Ensemble& ens, const AppArchive& app,
                                    std::size_t label_threshold = kDefaultLabelThreshold) {
  return annotate(ens, scan(ens, app), label_threshold);
}

}  // namespace spoofbench
