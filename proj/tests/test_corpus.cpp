#include <filesystem>
#include <map>

#include <catch2/catch_amalgamated.hpp>

#include "spoofbench/corpus.hpp"

using namespace spoofbench;

namespace {

CorpusConfig desk_cfg(std::size_t nb, std::size_t nm, std::uint64_t seed) {
  CorpusConfig cfg;
  cfg.n_benign = nb;
  cfg.n_malicious = nm;
  cfg.n_categories = std::min<std::size_t>(50, nb);
  cfg.n_families = std::min<std::size_t>(196, nm);
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("generation is deterministic") {
  auto a = generate_corpus(desk_cfg(10, 10, 7));
  auto b = generate_corpus(desk_cfg(10, 10, 7));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].group == b[i].group);
    CHECK(a[i].repackable == b[i].repackable);
    CHECK(write_archive(a[i].archive) == write_archive(b[i].archive));
  }
}

TEST_CASE("Ds-shaped corpus has ten benign apps per category") {
  auto apps = generate_corpus(desk_cfg(500, 500, 3));
  std::map<std::string, std::size_t> categories, families;
  for (const auto& app : apps) {
    if (app.true_label == Label::kBenign) ++categories[app.group];
    else ++families[app.group];
  }
  CHECK(categories.size() == 50);
  for (const auto& [cat, n] : categories) CHECK(n == 10);
  CHECK(families.size() == 196);
  for (const auto& [fam, n] : families) {  // 500/196: two or three per family
    CHECK(n >= 2);
    CHECK(n <= 3);
  }
}

TEST_CASE("every app carries exactly one manifest and one dexl") {
  auto apps = generate_corpus(desk_cfg(30, 30, 11));
  for (const auto& app : apps) {
    std::size_t manifests = 0, dexes = 0;
    for (const auto& e : app.archive.entries) {
      manifests += e.path == "AndroidManifest.xml";
      dexes += e.path == "classes.dexl";
    }
    CHECK(manifests == 1);
    CHECK(dexes == 1);
  }
}

TEST_CASE("benign apps contain no catalog payload bytes") {
  auto apps = generate_corpus(desk_cfg(60, 10, 5));
  const auto& catalog = default_catalog();
  for (const auto& app : apps) {
    if (app.true_label != Label::kBenign) continue;
    for (const auto& e : app.archive.entries)
      for (const auto& row : catalog) CHECK(e.bytes != row.bytes);
  }
}

TEST_CASE("repackable fraction tracks the configured rate") {
  CorpusConfig cfg = desk_cfg(10000, 1, 13);
  std::size_t repackable = 0;
  auto apps = generate_corpus(cfg);
  std::size_t benign = 0;
  for (const auto& app : apps) {
    if (app.true_label != Label::kBenign) continue;
    ++benign;
    repackable += app.repackable;
  }
  double rate = static_cast<double>(repackable) / static_cast<double>(benign);
  CHECK(rate > 0.967);
  CHECK(rate < 0.987);
}

TEST_CASE("repack round-trips the archive and sets the signing flag") {
  auto apps = generate_corpus(desk_cfg(20, 5, 17));
  std::size_t checked = 0;
  for (const auto& app : apps) {
    if (!app.repackable) {
      CHECK_THROWS_AS(repack(app), RepackError);
      continue;
    }
    AppArchive rp = repack(app);
    CHECK(rp.is_signed);
    CHECK(write_archive(rp.archive) == write_archive(app.archive));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("corpus save/load round trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "sb_corpus_test";
  fs::remove_all(dir);
  auto apps = generate_corpus(desk_cfg(8, 8, 23));
  save_corpus(dir, apps);
  auto loaded = load_corpus(dir);
  REQUIRE(loaded.size() == apps.size());
  for (std::size_t i = 0; i < apps.size(); ++i) {
    CHECK(loaded[i].id == apps[i].id);
    CHECK(loaded[i].true_label == apps[i].true_label);
    CHECK(loaded[i].group == apps[i].group);
    CHECK(loaded[i].repackable == apps[i].repackable);
    CHECK(write_archive(loaded[i].archive) == write_archive(apps[i].archive));
  }
  fs::remove_all(dir);
}

TEST_CASE("config validation") {
  CorpusConfig cfg = desk_cfg(10, 10, 1);
  cfg.n_categories = 11;
  CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
  cfg = desk_cfg(10, 10, 1);
  cfg.n_families = 11;
  CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
  cfg = desk_cfg(10, 10, 1);
  cfg.repack_success_rate = 1.5;
  CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
  cfg = desk_cfg(10, 10, 1);
  cfg.api_pool_size = 100;
  CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
}

TEST_CASE("family marker bytes depend only on the family name") {
  CHECK(family_marker_bytes("fam000") == family_marker_bytes("fam000"));
  CHECK(family_marker_bytes("fam000") != family_marker_bytes("fam001"));
}
