#include <catch2/catch_amalgamated.hpp>

#include "spoofbench/archive.hpp"
#include "spoofbench/catalog.hpp"
#include "spoofbench/rng.hpp"

using namespace spoofbench;

namespace {

Bytes from_hex(const std::string& hex) {
  Bytes out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
  return out;
}

// Reference bytes produced by an independent zip implementation (python3
// zipfile, ZIP_STORED, 1980-01-01 timestamps).
const char* kEmptyZipHex = "504b0506000000000000000000000000000000000000";
const char* kOneEntryZipHex =
    "504b030414000000000000002100ac2a93d8020000000200000005000000612e7478746869"
    "504b0102140314000000000000002100ac2a93d80200000002000000050000000000000000"
    "000000800100000000612e747874"
    "504b0506000000000100010033000000250000000000";

Archive random_archive(Rng& rng) {
  Archive a;
  std::size_t n = rng.bounded(6);
  for (std::size_t i = 0; i < n; ++i) {
    std::string path;
    std::size_t depth = 1 + rng.bounded(3);
    for (std::size_t d = 0; d < depth; ++d) {
      if (d) path += '/';
      path += "dir" + std::to_string(rng.bounded(5));
    }
    path += "/f" + std::to_string(i) + ".bin";
    a.entries.emplace_back(path, rng.bytes(rng.bounded(200)));
  }
  return a;
}

}  // namespace

TEST_CASE("empty archive is the 22-byte end record") {
  Archive empty;
  CHECK(write_archive(empty) == from_hex(kEmptyZipHex));
  CHECK(parse_archive(from_hex(kEmptyZipHex)).entries.empty());
}

TEST_CASE("external reference archive parses field by field") {
  Archive a = parse_archive(from_hex(kOneEntryZipHex));
  REQUIRE(a.entries.size() == 1);
  CHECK(a.entries[0].path == "a.txt");
  CHECK(to_string(a.entries[0].bytes) == "hi");
  CHECK(a.entries[0].crc == 0xd8932aacu);
  CHECK(a.entries[0].crc == crc32(to_bytes("hi")));
}

TEST_CASE("truncated central directory raises ParseError") {
  Bytes b = from_hex(kOneEntryZipHex);
  Bytes truncated(b.begin(), b.begin() + 60);
  CHECK_THROWS_AS(parse_archive(truncated), ParseError);
}

TEST_CASE("round trip is the identity on random archives") {
  Rng rng(20240101);
  for (int i = 0; i < 100; ++i) {
    Archive a = random_archive(rng);
    Bytes wire = write_archive(a);
    CHECK(parse_archive(wire) == a);
    CHECK(write_archive(a) == wire);  // serialization is deterministic
  }
}

TEST_CASE("central directory preserves entry order") {
  Archive a;
  a.entries.emplace_back("zz.txt", to_bytes("1"));
  a.entries.emplace_back("aa.txt", to_bytes("2"));
  Archive back = parse_archive(write_archive(a));
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].path == "zz.txt");
  CHECK(back.entries[1].path == "aa.txt");
}

TEST_CASE("duplicate paths are rejected") {
  Archive a;
  a.entries.emplace_back("x", to_bytes("1"));
  a.entries.emplace_back("x", to_bytes("2"));
  CHECK_THROWS_AS(write_archive(a), InvariantError);
}

TEST_CASE("compression methods other than store are unsupported") {
  Bytes b = from_hex(kOneEntryZipHex);
  // method field of the central header (2 bytes at central offset + 10)
  std::size_t central = 0x25;
  b[central + 10] = 8;  // deflate
  CHECK_THROWS_AS(parse_archive(b), UnsupportedError);
}

TEST_CASE("corrupted content raises IntegrityError naming the path") {
  Bytes b = from_hex(kOneEntryZipHex);
  b[35] = 'X';  // the 'h' of "hi"
  try {
    parse_archive(b);
    FAIL("expected IntegrityError");
  } catch (const IntegrityError& e) {
    CHECK(std::string(e.what()).find("a.txt") != std::string::npos);
  }
}

TEST_CASE("injection adds exactly one entry and leaves the rest untouched") {
  Archive a;
  a.entries.emplace_back("AndroidManifest.xml", to_bytes("<manifest package=\"x.y\">\n</manifest>\n"));
  a.entries.emplace_back("classes.dexl", to_bytes("DEXL1\n"));
  a.entries.emplace_back("res/raw/ok.bin", to_bytes("data"));

  const auto& gif = default_catalog()[2];  // image/gif row, 55 bytes
  Archive after = inject_entry(a, gif, "res/", 42);
  REQUIRE(after.entries.size() == a.entries.size() + 1);
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    CHECK(after.entries[i] == a.entries[i]);
  const ArchiveEntry* added = after.find("res/loading.gif");
  REQUIRE(added != nullptr);
  CHECK(added->bytes.size() == 55);

  // size grows by payload plus fixed per-entry container overhead
  std::size_t overhead = 30 + 46 + 2 * added->path.size();
  CHECK(write_archive(after).size() == write_archive(a).size() + 55 + overhead);

  // inverse pair: removing the injected path restores the original bytes
  CHECK(write_archive(after.without_entry(added->path)) == write_archive(a));

  // determinism
  CHECK(write_archive(inject_entry(a, gif, "res/", 42)) == write_archive(after));
}

TEST_CASE("injection collisions get a seed-derived numeric suffix") {
  Archive a;
  a.entries.emplace_back("res/loading.gif", to_bytes("existing"));
  const auto& gif = default_catalog()[2];
  Archive after = inject_entry(a, gif, "res/", 7);
  REQUIRE(after.entries.size() == 2);
  const std::string& path = after.entries[1].path;
  CHECK(path.rfind("res/loading-", 0) == 0);
  CHECK(path.find(".gif") != std::string::npos);
  CHECK(write_archive(inject_entry(a, gif, "res/", 7)) == write_archive(after));
}

TEST_CASE("forbidden injection locations") {
  Archive a;
  a.entries.emplace_back("AndroidManifest.xml", to_bytes("x"));
  const auto& row = default_catalog()[0];
  CHECK_THROWS_AS(inject_entry(a, row, "", 1), ForbiddenLocationError);
  CHECK_THROWS_AS(inject_entry(a, row, "/", 1), ForbiddenLocationError);
  CHECK_THROWS_AS(inject_entry(a, row, "classes.dexl", 1), ForbiddenLocationError);
  CHECK_THROWS_AS(inject_entry(a, row, "assets/", 1), ForbiddenLocationError);
  CHECK_NOTHROW(inject_entry(a, row, "assets/", 1, {"res/", "assets/"}));
}

TEST_CASE("size_delta arithmetic") {
  // one entry named "a": container overhead is 30+1 + 46+1 + 22 = 100 bytes
  Archive before;
  before.entries.emplace_back("a", Rng(1).bytes(900));
  REQUIRE(write_archive(before).size() == 1000);
  Archive after;
  after.entries.emplace_back("a", Rng(1).bytes(914));
  REQUIRE(write_archive(after).size() == 1014);

  CHECK(size_delta(before, before) == 0.0);
  CHECK(size_delta(before, after) == Catch::Approx(0.014).epsilon(1e-12));
  CHECK_THROWS_AS(size_delta(Archive{}, after), DegenerateInputError);
}

TEST_CASE("entry paths reject .. segments and backslashes") {
  Archive a;
  a.entries.emplace_back("../evil", to_bytes("x"));
  CHECK_THROWS_AS(write_archive(a), InvariantError);
  Archive b;
  b.entries.emplace_back("dir\\file", to_bytes("x"));
  CHECK_THROWS_AS(write_archive(b), InvariantError);
}
