#pragma once

// The injectable-payload catalog: ten small files, one per MIME type commonly
// found inside benign app archives, each recognized by a fixed subset of the
// simulated AV ensemble and attributed to one malware family.

#include <set>
#include <string>
#include <vector>

#include "spoofbench/archive.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/rng.hpp"
#include "spoofbench/util.hpp"

namespace spoofbench {

constexpr std::size_t kDefaultEngineCount = 62;
constexpr std::size_t kMaxPayloadBytes = 4505;

inline std::string engine_id(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "av%02zu", i);
  return buf;
}

struct MalwareCatalogEntry {
  std::string mime;
  std::string filename;
  Bytes bytes;
  std::string family;
  std::set<std::string> detection_profile;  // engine ids expected to match
  double inclusion_likelihood{};
};

// Ten rows: mime, innocuous filename, payload size, detection count, family,
// inclusion likelihood. Payload bytes are seeded synthetic filler — only
// their digests matter to the scanner.
inline const std::vector<MalwareCatalogEntry>& default_catalog() {
  static const std::vector<MalwareCatalogEntry> catalog = [] {
    struct Row {
      const char* mime;
      const char* filename;
      double inclusion;
      std::size_t detections;
      const char* family;
      std::size_t size;
    };
    static constexpr Row rows[] = {
        {"text/xml", "data.xml", 1.000, 29, "groooboor", 316},
        {"app/octet-stream", "blob.bin", 0.994, 33, "gnaeus", 650},
        {"image/gif", "loading.gif", 0.987, 32, "chopper", 55},
        {"text/html", "index.html", 0.979, 46, "scrinject", 92},
        {"text/plain", "notes.txt", 0.972, 23, "smallasp", 22},
        {"app/java-archive", "bundle.jar", 0.928, 22, "webshell", 985},
        {"app/json", "config.json", 0.916, 21, "coinminer", 1100},
        {"app/x-sharedlib", "libextra.so", 0.898, 33, "lotoor", 4505},
        {"app/javascript", "main.js", 0.857, 21, "scrinject", 590},
        {"app/gzip", "assets.gz", 0.851, 31, "dloadr", 782},
    };
    std::vector<MalwareCatalogEntry> out;
    std::size_t row_idx = 0;
    for (const Row& r : rows) {
      MalwareCatalogEntry e;
      e.mime = r.mime;
      e.filename = r.filename;
      e.family = r.family;
      e.inclusion_likelihood = r.inclusion;
      e.bytes = Rng(fnv1a64("catalog-payload")).split(row_idx).bytes(r.size);
      Rng prof = Rng(fnv1a64("catalog-profile")).split(row_idx);
      for (std::size_t i : prof.sample_indices(kDefaultEngineCount, r.detections))
        e.detection_profile.insert(engine_id(i));
      out.push_back(std::move(e));
      ++row_idx;
    }
    return out;
  }();
  return catalog;
}

inline const std::vector<std::string>& catalog_mime_extensions() {
  static const std::vector<std::string> exts = {
      ".xml", ".bin", ".gif", ".html", ".txt", ".jar", ".json", ".so", ".js", ".gz"};
  return exts;
}

inline Archive inject_entry(const Archive& a, const MalwareCatalogEntry& payload,
                            const std::string& dir, std::uint64_t seed,
                            const std::vector<std::string>& allowed_roots = {"res/"}) {
  return inject_entry_raw(a, payload.filename, payload.bytes, dir, seed, allowed_roots);
}

}  // namespace spoofbench
