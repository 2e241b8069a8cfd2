#include "doctest.h"

#include "sdl/wordvec.hpp"
#include "testutil.hpp"

#include <cmath>

using namespace sdl;

TEST_CASE("canonical form lowercases and joins on underscores") {
  CHECK(canonical_label("A") == "a");
  CHECK(canonical_label("New York") == "new_york");
  CHECK(canonical_label("TAB\there") == "tab_here");
  CHECK(canonical_label("already_canonical") == "already_canonical");
  CHECK(canonical_label("") == "");
}

TEST_CASE("vectors are unit-normalized on insert") {
  WordVecTable table(3);
  Vec v(3);
  v << 0, 2, 0;
  table.insert("b", v);
  const Vec got = table.lookup("b");
  CHECK(got[0] == doctest::Approx(0.0));
  CHECK(got[1] == doctest::Approx(1.0));
  CHECK(got[2] == doctest::Approx(0.0));
  CHECK(got.norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("insert rejects bad inputs") {
  WordVecTable table(2);
  Vec v(2);
  v << 1, 0;
  table.insert("a", v);

  SUBCASE("duplicate after canonicalization") {
    Vec w(2);
    w << 0, 1;
    CHECK_THROWS_AS(table.insert("A", w), ValidationError);
  }
  SUBCASE("dimension mismatch") {
    Vec w(3);
    w << 1, 0, 0;
    CHECK_THROWS_AS(table.insert("c", w), ValidationError);
  }
  SUBCASE("zero norm") {
    Vec w = Vec::Zero(2);
    CHECK_THROWS_AS(table.insert("z", w), ValidationError);
  }
  SUBCASE("empty label") {
    Vec w(2);
    w << 0, 1;
    CHECK_THROWS_AS(table.insert("", w), ValidationError);
    table.insert("  ", w);  // whitespace-only is legal: canonicalizes to "__"
    CHECK(table.contains("__"));
  }
}

TEST_CASE("lookup matches the canonical form") {
  WordVecTable table(2);
  Vec v(2);
  v << 1, 0;
  table.insert("sky", v);
  CHECK(table.contains("Sky"));
  CHECK_FALSE(table.contains("sea"));
  CHECK(table.lookup("SKY")[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(table.lookup("sea"), ValidationError);
}

TEST_CASE("multi-token labels fall back to the normalized token mean") {
  WordVecTable table(2);
  Vec x(2), y(2);
  x << 1, 0;
  y << 0, 1;
  table.insert("x", x);
  table.insert("y", y);

  const Vec got = table.lookup("x y");
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(got[0] == doctest::Approx(s));
  CHECK(got[1] == doctest::Approx(s));

  CHECK_THROWS_AS(table.lookup("x z"), ValidationError);   // missing token
  CHECK_THROWS_AS(table.lookup("missing"), ValidationError);
  CHECK_FALSE(table.contains("x y"));  // contains is exact-match only
}

TEST_CASE("parse reads the header-then-rows text format") {
  testutil::TempDir dir;
  const auto path = dir.file("toy.vec");
  testutil::write_file(path, "2 3\na 1 0 0\nb 0 2 0\n");
  const auto table = WordVecTable::parse_file(path);
  CHECK(table.size() == 2);
  CHECK(table.dim() == 3);
  CHECK(table.lookup("a")[0] == doctest::Approx(1.0));
  CHECK(table.lookup("b")[1] == doctest::Approx(1.0));
}

TEST_CASE("parse tolerates CRLF line endings") {
  testutil::TempDir dir;
  const auto path = dir.file("crlf.vec");
  testutil::write_file(path, "1 2\r\na 3 4\r\n");
  const auto table = WordVecTable::parse_file(path);
  CHECK(table.lookup("a")[0] == doctest::Approx(0.6));
  CHECK(table.lookup("a")[1] == doctest::Approx(0.8));
}

TEST_CASE("parse rejects malformed files") {
  testutil::TempDir dir;
  auto expect_throw = [&](const char* name, const std::string& content) {
    const auto path = dir.file(name);
    testutil::write_file(path, content);
    CHECK_THROWS_AS(WordVecTable::parse_file(path), ValidationError);
  };
  expect_throw("empty.vec", "");
  expect_throw("header.vec", "not a header\n");
  expect_throw("extra-header.vec", "1 2 3\na 1 0\n");
  expect_throw("short.vec", "1 3\na 1 0\n");          // token count != dim+1
  expect_throw("badfloat.vec", "1 2\na 1 x\n");
  expect_throw("nan.vec", "1 2\na nan 1\n");
  expect_throw("zero.vec", "1 3\na 0 0 0\n");
  expect_throw("count.vec", "3 2\na 1 0\nb 0 1\n");   // declared 3, has 2
  expect_throw("dup.vec", "2 2\na 1 0\nA 0 1\n");
  CHECK_THROWS_AS(WordVecTable::parse_file(dir.file("absent.vec")), ValidationError);
}

TEST_CASE("save and parse round-trip is stable") {
  testutil::TempDir dir;
  WordVecTable table(4);
  Vec v(4);
  v << 0.3, -1.7, 0.0031, 9.25;
  table.insert("first", v);
  v << -2, 2, 2, -2;
  table.insert("second", v);

  const auto p1 = dir.file("round1.vec");
  table.save(p1);
  const auto loaded = WordVecTable::parse_file(p1);
  REQUIRE(loaded.size() == table.size());
  for (const auto& [label, vec] : table.entries()) {
    const Vec got = loaded.lookup(label);
    for (Eigen::Index i = 0; i < vec.size(); ++i) {
      CHECK(got[i] == doctest::Approx(vec[i]).epsilon(1e-6));
    }
  }

  // Second generation is byte-identical: parse does not disturb stored
  // values, so the format is a fixed point.
  const auto p2 = dir.file("round2.vec");
  loaded.save(p2);
  CHECK(testutil::read_file(p1) == testutil::read_file(p2));
}
