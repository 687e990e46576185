#include <catch2/catch_amalgamated.hpp>

#include "spoofbench/dexlite.hpp"

using namespace spoofbench;

TEST_CASE("dexlite round trip") {
  DexLiteProgram p;
  p.methods.push_back(
      {"onCreate",
       {DexStatement::call(Guard::kUnguarded, "android.net.Url.openConnection"),
        DexStatement::call(Guard::kGuarded, "com.x.Y.z"),
        DexStatement::call(Guard::kUnguarded, "self.helper"),
        DexStatement::str("http://x.com"), DexStatement::str("plain text with spaces")}});
  p.methods.push_back({"helper", {DexStatement::call(Guard::kUnguarded, "java.io.File.read")}});

  std::string text = write_dexlite(p);
  CHECK(text.rfind("DEXL1\n", 0) == 0);
  CHECK(parse_dexlite(text) == p);
}

TEST_CASE("dexlite parse errors carry line numbers") {
  CHECK_THROWS_AS(parse_dexlite("no magic\n"), ParseError);
  CHECK_THROWS_AS(parse_dexlite("DEXL1\nC u a.b.c\n"), ParseError);  // before any method
  try {
    parse_dexlite("DEXL1\nM m\nBOGUS\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("dexlite invariants") {
  DexLiteProgram dup;
  dup.methods.push_back({"m", {}});
  dup.methods.push_back({"m", {}});
  CHECK_THROWS_AS(write_dexlite(dup), InvariantError);

  DexLiteProgram bad_callee;
  bad_callee.methods.push_back({"m", {DexStatement::call(Guard::kUnguarded, "nodots")}});
  CHECK_THROWS_AS(write_dexlite(bad_callee), InvariantError);

  CHECK(is_internal_callee("self.util"));
  CHECK_FALSE(is_external_callee("self.util"));
  CHECK(is_external_callee("a.b"));
  CHECK(is_external_callee("android.net.Url.open"));
  CHECK_FALSE(is_external_callee("plain"));
}

TEST_CASE("manifest round trip with escapes") {
  ManifestInfo m;
  m.package = "com.a&b.app";
  m.permissions = {"INTERNET", "X<Y>\"Z\""};
  m.components = {{"activity", "ui.Main"}, {"service", "svc.S&S"}};
  CHECK(parse_manifest(write_manifest(m)) == m);
}

TEST_CASE("manifest parse errors") {
  CHECK_THROWS_AS(parse_manifest("<bogus/>\n"), ParseError);
  CHECK_THROWS_AS(parse_manifest("<manifest package=\"x\">\n"), ParseError);  // unclosed
  CHECK_THROWS_AS(
      parse_manifest("<manifest package=\"x\">\n<uses-permission/>\n</manifest>\n"),
      ParseError);  // missing name attribute
  CHECK_THROWS_AS(
      parse_manifest("<manifest package=\"x\">\n</manifest>\ntrailing\n"), ParseError);
}
