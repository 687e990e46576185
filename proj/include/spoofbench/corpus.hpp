#pragma once

// Deterministic synthetic app population. Benign apps are grouped into store
// categories sharing an API-call signature; malicious apps are grouped into
// families built the way real Android malware mostly is: a benign category
// base (repackaged goodware) plus a small family-specific payload — marker
// API calls from dedicated SDK-like package roots, one suspicious permission,
// and a family marker file whose digest the AV ensemble recognizes.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spoofbench/archive.hpp"
#include "spoofbench/catalog.hpp"
#include "spoofbench/dexlite.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/rng.hpp"
#include "spoofbench/util.hpp"

namespace spoofbench {

enum class Label : std::uint8_t { kBenign = 0, kMalicious = 1 };

inline std::string label_name(Label l) {
  return l == Label::kBenign ? "benign" : "malicious";
}

struct AppArchive {
  std::string id;
  Archive archive;
  Label true_label{Label::kBenign};
  std::string group;  // category (benign) or family (malicious)
  bool repackable{true};
  bool is_signed{false};
};

struct CorpusConfig {
  std::size_t n_benign = 500;
  std::size_t n_malicious = 500;
  std::size_t n_categories = 50;
  std::size_t n_families = 196;
  std::size_t api_pool_size = 2700;
  std::uint64_t seed = 0;
  double repack_success_rate = 0.977;
};

// ---- fixed structural vocabulary ------------------------------------------

inline const std::vector<std::string>& benign_package_roots() {
  static const std::vector<std::string> roots = {
      "android.app",      "android.content",  "android.os",
      "android.view",     "android.widget",   "android.net",
      "android.media",    "android.graphics", "android.location",
      "android.hardware", "android.database", "android.webkit",
      "java.lang",        "java.util",        "java.io",
      "java.net",         "java.text",        "javax.crypto",
      "javax.net",        "org.json",         "org.w3c.dom",
      "org.xml.sax",      "com.google.gson",  "io.reactivex"};
  return roots;
}

// Marker calls live under their own roots so call-transition features pick
// them up as distinct states.
inline const std::vector<std::string>& marker_package_roots() {
  static const std::vector<std::string> roots = {
      "com.adpush.core", "com.tracksdk.net", "com.minerlib.worker",
      "com.shellsvc.rt", "com.smspay.gate",  "com.hiddensdk.util"};
  return roots;
}

inline const std::vector<std::string>& package_roots() {
  static const std::vector<std::string> all = [] {
    auto v = benign_package_roots();
    const auto& m = marker_package_roots();
    v.insert(v.end(), m.begin(), m.end());
    return v;
  }();
  return all;
}

namespace detail {

inline const std::vector<std::string>& pool_classes() {
  static const std::vector<std::string> v = {"Manager", "Client",  "Util",
                                             "Service", "Factory", "Session",
                                             "Loader",  "Cache",   "Parser",
                                             "Stream"};
  return v;
}

inline const std::vector<std::string>& pool_methods() {
  static const std::vector<std::string> v = {
      "open",  "close", "read", "write", "connect", "send", "recv", "query",
      "parse", "init",  "run",  "exec",  "load",    "fetch", "sync"};
  return v;
}

inline std::string pool_callee(const std::vector<std::string>& roots, std::size_t i) {
  const auto& cls = pool_classes();
  const auto& ms = pool_methods();
  std::size_t r = i % roots.size();
  std::size_t c = (i / roots.size()) % cls.size();
  std::size_t m = (i / (roots.size() * cls.size())) % ms.size();
  return roots[r] + "." + cls[c] + "." + ms[m];
}

constexpr std::size_t kMarkerPoolSize = 700;
constexpr std::size_t kSharedMarkerCount = 60;  // pool every malicious app draws from
constexpr std::size_t kFamilyMarkerCalls = 3;
constexpr std::size_t kCategorySigCalls = 20;
constexpr std::size_t kBenignNoiseCalls = 12;
constexpr std::size_t kMaliciousNoiseCalls = 2;
constexpr std::size_t kSharedMarkerDraws = 2;
constexpr std::size_t kCategoryPerms = 6;
// Per-app noise comes from a compact slice of the pool: common utility calls
// recur across unrelated apps instead of being one-off.
constexpr std::size_t kNoisePoolSize = 300;

inline const std::vector<std::string>& benign_permissions() {
  static const std::vector<std::string> v = {
      "INTERNET",         "ACCESS_NETWORK_STATE",   "ACCESS_WIFI_STATE",
      "READ_EXTERNAL_STORAGE", "WRITE_EXTERNAL_STORAGE", "CAMERA",
      "RECORD_AUDIO",     "ACCESS_FINE_LOCATION",   "ACCESS_COARSE_LOCATION",
      "BLUETOOTH",        "NFC",                    "VIBRATE",
      "WAKE_LOCK",        "READ_CONTACTS",          "READ_CALENDAR",
      "WRITE_CALENDAR",   "READ_PHONE_STATE",       "BODY_SENSORS",
      "USE_FINGERPRINT",  "FOREGROUND_SERVICE",     "POST_NOTIFICATIONS",
      "GET_ACCOUNTS",     "RECEIVE_BOOT_COMPLETED", "FLASHLIGHT",
      "DOWNLOAD_WITHOUT_NOTIFICATION", "EXPAND_STATUS_BAR", "SET_WALLPAPER",
      "TRANSMIT_IR",      "UPDATE_SHORTCUTS",       "READ_SYNC_SETTINGS"};
  return v;
}

inline const std::vector<std::string>& suspicious_permissions() {
  static const std::vector<std::string> v = {
      "SEND_SMS",          "RECEIVE_SMS",
      "SYSTEM_ALERT_WINDOW", "BIND_DEVICE_ADMIN",
      "REQUEST_INSTALL_PACKAGES", "WRITE_SETTINGS"};
  return v;
}

// Short residue names a shrinker would leave behind; none match a known root.
inline const std::vector<std::string>& obfuscated_callees() {
  static const std::vector<std::string> v = [] {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < 30; ++i) {
      std::string root(1, static_cast<char>('a' + i % 6));
      out.push_back(root + std::to_string(i) + ".o.run");
    }
    return out;
  }();
  return v;
}

}  // namespace detail

// External API-call pool. The front `api_pool_size - 700` callees use common
// platform roots; the last 700 are the marker segment reserved for malware.
inline std::vector<std::string> api_pool(std::size_t api_pool_size) {
  if (api_pool_size < 2 * detail::kMarkerPoolSize)
    throw ConfigError("api_pool_size must be at least " +
                      std::to_string(2 * detail::kMarkerPoolSize));
  std::vector<std::string> pool;
  pool.reserve(api_pool_size);
  std::size_t n_benign_pool = api_pool_size - detail::kMarkerPoolSize;
  for (std::size_t i = 0; i < n_benign_pool; ++i)
    pool.push_back(detail::pool_callee(benign_package_roots(), i));
  for (std::size_t i = 0; i < detail::kMarkerPoolSize; ++i)
    pool.push_back(detail::pool_callee(marker_package_roots(), i));
  return pool;
}

inline std::string category_name(std::size_t c) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cat%02zu", c);
  return buf;
}

inline std::string family_name(std::size_t f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fam%03zu", f);
  return buf;
}

inline std::vector<std::string> family_names(std::size_t n_families) {
  std::vector<std::string> v;
  v.reserve(n_families);
  for (std::size_t f = 0; f < n_families; ++f) v.push_back(family_name(f));
  return v;
}

// Family marker file content is a pure function of the family name, so the
// annotator can rebuild the digest set from names alone.
inline Bytes family_marker_bytes(const std::string& family) {
  std::size_t size = 200 + fnv1a64(family) % 200;
  return Rng(fnv1a64("family-marker")).split(family).bytes(size);
}

namespace detail {

struct CategoryProfile {
  std::vector<std::string> sig_calls;  // fixed order: shared transitions
  std::vector<std::string> perms;
  std::vector<std::pair<std::string, std::string>> comps;
  std::vector<std::string> urls;
};

inline CategoryProfile category_profile(const CorpusConfig& cfg,
                                        const std::vector<std::string>& pool,
                                        std::size_t c) {
  CategoryProfile p;
  Rng rng = Rng(cfg.seed).split("cat-sig").split(c);
  std::size_t n_benign_pool = pool.size() - kMarkerPoolSize;
  // signatures draw from above the shared noise slice
  for (std::size_t i :
       rng.sample_indices(n_benign_pool - kNoisePoolSize, kCategorySigCalls))
    p.sig_calls.push_back(pool[kNoisePoolSize + i]);
  const auto& perms = benign_permissions();
  for (std::size_t i : rng.sample_indices(perms.size(), kCategoryPerms))
    p.perms.push_back(perms[i]);
  std::string cat = category_name(c);
  p.comps = {{"activity", "ui." + cat + ".Main"},
             {"service", "svc." + cat + ".Sync"},
             {"receiver", "rcv." + cat + ".Boot"}};
  p.urls = {"https://cdn." + cat + ".example.com/v1",
            "https://api." + cat + ".example.com/ping"};
  return p;
}

// MIME-mix filler entries drawn per the catalog inclusion likelihoods. The
// bytes are app-unique noise; only their types mirror what real apps carry.
inline void add_mime_fillers(Archive& ar, Rng& rng) {
  const auto& catalog = default_catalog();
  const auto& exts = catalog_mime_extensions();
  for (std::size_t r = 0; r < catalog.size(); ++r) {
    if (!rng.bernoulli(catalog[r].inclusion_likelihood)) continue;
    std::string dir = (r % 2 == 0) ? "res/raw/" : "assets/";
    std::string path = dir + "media" + std::to_string(r) + exts[r];
    std::size_t size = 30 + rng.bounded(800);
    ar.entries.emplace_back(path, rng.bytes(size));
  }
}

inline void validate_config(const CorpusConfig& cfg) {
  if (cfg.n_benign < 1 || cfg.n_malicious < 1)
    throw ConfigError("corpus needs at least one app per class");
  if (cfg.n_categories > cfg.n_benign)
    throw ConfigError("n_categories exceeds benign count");
  if (cfg.n_families > cfg.n_malicious)
    throw ConfigError("n_families exceeds malicious count");
  if (cfg.repack_success_rate < 0.0 || cfg.repack_success_rate > 1.0)
    throw ConfigError("repack_success_rate outside [0,1]");
  if (cfg.n_families * kFamilyMarkerCalls > kMarkerPoolSize - kSharedMarkerCount)
    throw ConfigError("marker pool too small for n_families");
}

}  // namespace detail

// Families repackage categories: family f is based on category f mod T where
// T covers 70% of the categories. The rest have no malware twin, which keeps
// part of the benign population in clean neighborhoods.
inline std::size_t twinned_category_count(std::size_t n_categories) {
  return std::max<std::size_t>(1, (n_categories * 7) / 10);
}

inline std::vector<AppArchive> generate_corpus(const CorpusConfig& cfg) {
  detail::validate_config(cfg);
  const auto pool = api_pool(cfg.api_pool_size);
  const std::size_t n_benign_pool = pool.size() - detail::kMarkerPoolSize;
  const std::size_t marker_base = n_benign_pool;

  // Disjoint per-family marker slices out of a seeded shuffle.
  Rng marker_rng = Rng(cfg.seed).split("family-markers");
  std::vector<std::size_t> marker_idx(detail::kMarkerPoolSize - detail::kSharedMarkerCount);
  for (std::size_t i = 0; i < marker_idx.size(); ++i)
    marker_idx[i] = marker_base + detail::kSharedMarkerCount + i;
  marker_rng.shuffle(marker_idx);

  std::vector<detail::CategoryProfile> cats;
  cats.reserve(cfg.n_categories);
  for (std::size_t c = 0; c < cfg.n_categories; ++c)
    cats.push_back(detail::category_profile(cfg, pool, c));

  const std::size_t twin_cats = twinned_category_count(cfg.n_categories);
  const auto& obf = detail::obfuscated_callees();
  std::vector<AppArchive> out;
  out.reserve(cfg.n_benign + cfg.n_malicious);

  auto base_dex = [&](const detail::CategoryProfile& cat, Rng& rng,
                      std::vector<std::string> extra_calls) {
    DexLiteProgram dex;
    std::size_t half = cat.sig_calls.size() / 2;
    DexMethod on_create{"onCreate", {}};
    for (std::size_t i = 0; i < half; ++i)
      on_create.statements.push_back(
          DexStatement::call(Guard::kUnguarded, cat.sig_calls[i]));
    on_create.statements.push_back(DexStatement::call(Guard::kUnguarded, "self.util"));
    on_create.statements.push_back(DexStatement::str(cat.urls[0]));

    DexMethod on_start{"onStart", {}};
    for (std::size_t i = half; i < cat.sig_calls.size(); ++i)
      on_start.statements.push_back(
          DexStatement::call(Guard::kUnguarded, cat.sig_calls[i]));
    bool has_guarded_noise = rng.bernoulli(0.3);
    std::size_t split_at = extra_calls.size() / 2;
    for (std::size_t i = 0; i < split_at; ++i) {
      Guard g = (has_guarded_noise && i == 0) ? Guard::kGuarded : Guard::kUnguarded;
      on_start.statements.push_back(DexStatement::call(g, extra_calls[i]));
    }
    on_start.statements.push_back(DexStatement::str(cat.urls[1]));

    DexMethod util{"util", {}};
    for (std::size_t i = split_at; i < extra_calls.size(); ++i)
      util.statements.push_back(DexStatement::call(Guard::kUnguarded, extra_calls[i]));
    if (rng.bernoulli(0.25))
      util.statements.push_back(
          DexStatement::call(Guard::kUnguarded, obf[rng.bounded(obf.size())]));
    util.statements.push_back(DexStatement::str("cache-dir"));

    dex.methods = {std::move(on_create), std::move(on_start), std::move(util)};
    return dex;
  };

  auto finish_app = [&](AppArchive& app, const detail::CategoryProfile& cat,
                        const DexLiteProgram& dex, const std::string& pkg,
                        const std::vector<std::string>& extra_perms, Rng& rng) {
    ManifestInfo mf;
    mf.package = pkg;
    for (const auto& p : cat.perms) mf.permissions.insert(p);
    for (const auto& p : extra_perms) mf.permissions.insert(p);
    for (const auto& c : cat.comps) mf.components.insert(c);

    Archive ar;
    ar.entries.emplace_back("AndroidManifest.xml", to_bytes(write_manifest(mf)));
    ar.entries.emplace_back("classes.dexl", to_bytes(write_dexlite(dex)));
    detail::add_mime_fillers(ar, rng);
    app.archive = std::move(ar);
    app.repackable = rng.bernoulli(cfg.repack_success_rate);
  };

  for (std::size_t i = 0; i < cfg.n_benign; ++i) {
    std::size_t c = i % cfg.n_categories;
    Rng rng = Rng(cfg.seed).split("app").split(i);
    AppArchive app;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "b%05zu", i);
    app.id = idbuf;
    app.true_label = Label::kBenign;
    app.group = category_name(c);

    std::vector<std::string> noise;
    for (std::size_t k : rng.sample_indices(n_benign_pool, detail::kBenignNoiseCalls))
      noise.push_back(pool[k]);
    DexLiteProgram dex = base_dex(cats[c], rng, std::move(noise));

    std::vector<std::string> extra_perms;
    const auto& perms = detail::benign_permissions();
    extra_perms.push_back(perms[rng.bounded(perms.size())]);

    finish_app(app, cats[c], dex, "com." + category_name(c) + ".app" + std::to_string(i),
               extra_perms, rng);
    out.push_back(std::move(app));
  }

  for (std::size_t j = 0; j < cfg.n_malicious; ++j) {
    std::size_t f = j % cfg.n_families;
    std::size_t c = f % twin_cats;
    Rng rng = Rng(cfg.seed).split("app").split(cfg.n_benign + j);
    AppArchive app;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "m%05zu", j);
    app.id = idbuf;
    app.true_label = Label::kMalicious;
    app.group = family_name(f);

    std::vector<std::string> noise;
    for (std::size_t k : rng.sample_indices(n_benign_pool, detail::kMaliciousNoiseCalls))
      noise.push_back(pool[k]);
    DexLiteProgram dex = base_dex(cats[c], rng, std::move(noise));

    // Family payload method: marker calls plus draws from the shared pool.
    DexMethod svc{"svc", {}};
    for (std::size_t k = 0; k < detail::kFamilyMarkerCalls; ++k)
      svc.statements.push_back(DexStatement::call(
          Guard::kUnguarded, pool[marker_idx[f * detail::kFamilyMarkerCalls + k]]));
    for (std::size_t k = 0; k < detail::kSharedMarkerDraws; ++k)
      svc.statements.push_back(DexStatement::call(
          Guard::kUnguarded,
          pool[marker_base + rng.bounded(detail::kSharedMarkerCount)]));
    dex.methods.push_back(std::move(svc));

    Rng fam_rng = Rng(cfg.seed).split("fam-perm").split(f);
    const auto& susp = detail::suspicious_permissions();
    std::vector<std::string> extra_perms = {susp[fam_rng.bounded(susp.size())]};

    finish_app(app, cats[c], dex, "com." + family_name(f) + ".app" + std::to_string(j),
               extra_perms, rng);
    // The marker file every engine signature for this family points at.
    app.archive.entries.emplace_back("assets/core.dat",
                                     family_marker_bytes(app.group));
    out.push_back(std::move(app));
  }
  return out;
}

// Simulated repackaging round trip. Apps flagged non-repackable fail the way
// real tooling does; callers skip them.
inline AppArchive repack(const AppArchive& app) {
  if (!app.repackable) throw RepackError("repackaging failed for " + app.id);
  AppArchive out = app;
  out.archive = parse_archive(write_archive(app.archive));
  out.is_signed = true;
  return out;
}

// ---- on-disk corpus layout: <id>.apkz files plus index.tsv -----------------

inline void save_corpus(const std::filesystem::path& dir,
                        const std::vector<AppArchive>& apps) {
  std::filesystem::create_directories(dir);
  std::string index;
  for (const auto& app : apps) {
    atomic_write(dir / (app.id + ".apkz"), write_archive(app.archive));
    index += app.id + "\t" + label_name(app.true_label) + "\t" + app.group + "\t" +
             (app.repackable ? "1" : "0") + "\n";
  }
  atomic_write(dir / "index.tsv", index);
}

inline std::vector<AppArchive> load_corpus(const std::filesystem::path& dir) {
  std::vector<AppArchive> out;
  for (const auto& line : split_on(read_file(dir / "index.tsv"), '\n')) {
    if (line.empty()) continue;
    auto fields = split_on(line, '\t');
    if (fields.size() != 4) throw ParseError("bad index record: " + line);
    AppArchive app;
    app.id = fields[0];
    if (fields[1] == "benign") app.true_label = Label::kBenign;
    else if (fields[1] == "malicious") app.true_label = Label::kMalicious;
    else throw ParseError("bad label in index: " + fields[1]);
    app.group = fields[2];
    app.repackable = fields[3] == "1";
    app.archive = parse_archive(read_file_bytes(dir / (app.id + ".apkz")));
    out.push_back(std::move(app));
  }
  return out;
}

}  // namespace spoofbench
