#pragma once

// Static feature extraction. Both extractors read AndroidManifest.xml and
// classes.dexl only — every other archive entry is invisible to them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "spoofbench/corpus.hpp"
#include "spoofbench/dexlite.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/rng.hpp"

namespace spoofbench {

using DrebinFeatureSet = std::set<std::string>;

struct FeatureDictionary {
  std::map<std::string, std::uint32_t> index;  // frozen after build

  std::size_t size() const { return index.size(); }
};

struct SparseBinaryVector {
  std::uint32_t dim = 0;
  std::vector<std::uint32_t> ones;  // sorted column ids
  bool operator==(const SparseBinaryVector&) const = default;
};

struct MarkovFeatures {
  std::vector<std::string> states;
  std::vector<double> matrix;  // |states| x |states|, row-major
  bool operator==(const MarkovFeatures&) const = default;
};

namespace detail {

struct ParsedApp {
  ManifestInfo manifest;
  DexLiteProgram dex;
};

inline ParsedApp parse_app(const AppArchive& app) {
  const ArchiveEntry* mf = app.archive.find("AndroidManifest.xml");
  const ArchiveEntry* dx = app.archive.find("classes.dexl");
  if (!mf) throw ExtractionError(app.id + ": missing AndroidManifest.xml");
  if (!dx) throw ExtractionError(app.id + ": missing classes.dexl");
  try {
    return {parse_manifest(to_string(mf->bytes)), parse_dexlite(to_string(dx->bytes))};
  } catch (const ParseError& e) {
    throw ExtractionError(app.id + ": " + e.what());
  }
}

}  // namespace detail

inline DrebinFeatureSet extract_drebin(const AppArchive& app) {
  auto [manifest, dex] = detail::parse_app(app);
  DrebinFeatureSet fs;
  for (const auto& p : manifest.permissions) fs.insert("perm::" + p);
  for (const auto& [kind, name] : manifest.components)
    fs.insert("comp::" + kind + ":" + name);
  for (const auto& m : dex.methods) {
    for (const auto& s : m.statements) {
      if (s.kind == DexStatement::Kind::kCall) {
        if (is_external_callee(s.text)) fs.insert("api::" + s.text);
      } else if (s.text.rfind("http://", 0) == 0 || s.text.rfind("https://", 0) == 0) {
        fs.insert("url::" + s.text);
      }
    }
  }
  return fs;
}

// Column ids in lexicographic feature order, built from training apps only.
inline FeatureDictionary build_dictionary(const std::vector<DrebinFeatureSet>& training) {
  if (training.empty()) throw ConfigError("empty training corpus for dictionary");
  FeatureDictionary dict;
  std::set<std::string> all;
  for (const auto& fs : training) all.insert(fs.begin(), fs.end());
  std::uint32_t id = 0;
  for (const auto& f : all) dict.index.emplace(f, id++);
  return dict;
}

// Unseen features are dropped, the standard deployment behavior.
inline SparseBinaryVector vectorize(const DrebinFeatureSet& fs,
                                    const FeatureDictionary& dict) {
  SparseBinaryVector v;
  v.dim = static_cast<std::uint32_t>(dict.index.size());
  for (const auto& f : fs) {
    auto it = dict.index.find(f);
    if (it != dict.index.end()) v.ones.push_back(it->second);
  }
  std::sort(v.ones.begin(), v.ones.end());
  return v;
}

// Longest dot-boundary prefix match against the known-package list; misses
// fall into "obfuscated", internal self.* calls into "self-defined".
inline std::vector<std::string> markov_states(const std::vector<std::string>& packages) {
  std::vector<std::string> states = packages;
  states.push_back("self-defined");
  states.push_back("obfuscated");
  return states;
}

namespace detail {

inline std::size_t abstract_callee(const std::string& callee,
                                   const std::vector<std::string>& packages) {
  // packages.size() -> self-defined, packages.size()+1 -> obfuscated
  if (is_internal_callee(callee)) return packages.size();
  std::size_t best = packages.size() + 1;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < packages.size(); ++i) {
    const std::string& p = packages[i];
    if (p.size() >= best_len && callee.size() > p.size() &&
        callee.compare(0, p.size(), p) == 0 && callee[p.size()] == '.') {
      best = i;
      best_len = p.size();
    }
  }
  return best;
}

}  // namespace detail

inline MarkovFeatures extract_mamadroid(const AppArchive& app,
                                        const std::vector<std::string>& packages) {
  auto [manifest, dex] = detail::parse_app(app);
  (void)manifest;
  MarkovFeatures mf;
  mf.states = markov_states(packages);
  std::size_t n = mf.states.size();
  std::vector<double> counts(n * n, 0.0);

  for (const auto& m : dex.methods) {
    std::size_t prev = n;  // none yet
    for (const auto& s : m.statements) {
      if (s.kind != DexStatement::Kind::kCall) continue;
      std::size_t cur = detail::abstract_callee(s.text, packages);
      if (prev != n) counts[prev * n + cur] += 1.0;
      prev = cur;
    }
  }

  mf.matrix.assign(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) row_sum += counts[r * n + c];
    if (row_sum > 0.0)
      for (std::size_t c = 0; c < n; ++c) mf.matrix[r * n + c] = counts[r * n + c] / row_sum;
  }
  return mf;
}

// Achlioptas-style sparse projection: entries {+c, 0, -c} with
// P(nonzero) = 1/s and c = sqrt(s / out_dim). Rows are generated lazily from
// per-row streams, so projecting never materializes the full matrix.
struct RandomProjection {
  std::uint32_t in_dim = 0;
  std::uint32_t out_dim = 0;
  std::uint64_t seed = 0;
  double sparsity = 3.0;  // s

  RandomProjection() = default;
  RandomProjection(std::uint32_t in, std::uint32_t out, std::uint64_t sd, double s = 3.0)
      : in_dim(in), out_dim(out), seed(sd), sparsity(s) {
    if (out_dim >= in_dim) throw ConfigError("projection must reduce dimension");
    if (sparsity < 1.0) throw ConfigError("projection sparsity must be >= 1");
  }

  // Li's very sparse variant: s = sqrt(d).
  static RandomProjection very_sparse(std::uint32_t in, std::uint32_t out,
                                      std::uint64_t sd) {
    return RandomProjection(in, out, sd, std::sqrt(static_cast<double>(in)));
  }
};

inline std::vector<double> project(const SparseBinaryVector& v,
                                   const RandomProjection& rp) {
  if (v.dim != rp.in_dim)
    throw ShapeError("vector dim " + std::to_string(v.dim) + " != projection in_dim " +
                     std::to_string(rp.in_dim));
  const double c = std::sqrt(rp.sparsity / static_cast<double>(rp.out_dim));
  const double p_half = 1.0 / (2.0 * rp.sparsity);
  std::vector<double> out(rp.out_dim, 0.0);
  for (std::uint32_t i : v.ones) {
    Rng row = Rng(rp.seed).split("rp-row").split(i);
    for (std::uint32_t j = 0; j < rp.out_dim; ++j) {
      double u = row.next_double();
      if (u < p_half) out[j] += c;
      else if (u < 2.0 * p_half) out[j] -= c;
    }
  }
  return out;
}

}  // namespace spoofbench
