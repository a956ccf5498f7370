#include "doctest.h"
#include "softmention/utf8.hpp"

namespace utf8 = softmention::utf8;

TEST_CASE("code point lengths and slicing") {
  CHECK(utf8::cp_length("") == 0);
  CHECK(utf8::cp_length("abc") == 3);
  // é is two bytes, one code point
  std::string s = "Université de Montréal";
  CHECK(utf8::cp_length(s) == 22);
  CHECK(utf8::slice(s, 0, 10) == "Université");
  CHECK(utf8::slice(s, 14, 22) == "Montréal");
}

TEST_CASE("slice bounds are checked") {
  CHECK_THROWS(utf8::slice("abc", 2, 5));
  CHECK_THROWS(utf8::slice("abc", 3, 2));
}

TEST_CASE("normalize_for_match folds case and whitespace") {
  CHECK(utf8::normalize_for_match("  Foo\t Bar ") == "foo bar");
  CHECK(utf8::normalize_for_match("FOO") == "foo");
  CHECK(utf8::normalize_for_match("a  b") == utf8::normalize_for_match("a b"));
  // non-ASCII survives untouched
  CHECK(utf8::normalize_for_match("Montréal") == "montréal");
}

TEST_CASE("decode tracks byte offsets") {
  utf8::Decoded d = utf8::decode("aéb");
  REQUIRE(d.size() == 3);
  CHECK(d.byte_offsets[0] == 0);
  CHECK(d.byte_offsets[1] == 1);
  CHECK(d.byte_offsets[2] == 3);
  CHECK(d.byte_offsets[3] == 4);
}
