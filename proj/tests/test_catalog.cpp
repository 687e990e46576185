#include <catch2/catch_amalgamated.hpp>

#include "spoofbench/catalog.hpp"

using namespace spoofbench;

TEST_CASE("catalog carries the ten expected rows") {
  const auto& cat = default_catalog();
  REQUIRE(cat.size() == 10);

  const std::size_t detections[] = {29, 33, 32, 46, 23, 22, 21, 33, 21, 31};
  const std::size_t sizes[] = {316, 650, 55, 92, 22, 985, 1100, 4505, 590, 782};
  const char* families[] = {"groooboor", "gnaeus",    "chopper", "scrinject",
                            "smallasp",  "webshell",  "coinminer", "lotoor",
                            "scrinject", "dloadr"};
  const char* mimes[] = {"text/xml",  "app/octet-stream", "image/gif",
                         "text/html", "text/plain",       "app/java-archive",
                         "app/json",  "app/x-sharedlib",  "app/javascript",
                         "app/gzip"};
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(cat[i].detection_profile.size() == detections[i]);
    CHECK(cat[i].bytes.size() == sizes[i]);
    CHECK(cat[i].family == families[i]);
    CHECK(cat[i].mime == mimes[i]);
  }
}

TEST_CASE("catalog invariants") {
  const auto& cat = default_catalog();
  CHECK(cat[2].mime == "image/gif");
  CHECK(cat[2].bytes.size() == 55);
  CHECK(cat[2].detection_profile.size() == 32);
  CHECK(cat[7].family == "lotoor");
  CHECK(cat[7].bytes.size() == 4505);
  for (const auto& e : cat) {
    CHECK(e.bytes.size() <= kMaxPayloadBytes);
    CHECK(e.detection_profile.size() >= 21);
    CHECK(e.detection_profile.size() <= kDefaultEngineCount);
    CHECK(e.inclusion_likelihood > 0.0);
    CHECK(e.inclusion_likelihood <= 1.0);
    for (const auto& eid : e.detection_profile) CHECK(eid.rfind("av", 0) == 0);
  }
  // inclusion likelihoods are sorted by spread, most common first
  for (std::size_t i = 1; i < cat.size(); ++i)
    CHECK(cat[i - 1].inclusion_likelihood >= cat[i].inclusion_likelihood);
}

TEST_CASE("catalog payload bytes are stable across calls") {
  const auto& a = default_catalog();
  const auto& b = default_catalog();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].bytes == b[i].bytes);
    CHECK(a[i].detection_profile == b[i].detection_profile);
  }
}
