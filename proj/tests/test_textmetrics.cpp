#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "speechgrade/rng.hpp"
#include "speechgrade/textmetrics.hpp"

using namespace speechgrade;

namespace {

using Words = std::vector<std::string>;

// Exhaustive recursive edit distance, the oracle for the DP.
std::size_t naive_distance(const Words& a, const Words& b, std::size_t i,
                           std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const std::size_t sub =
      naive_distance(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
  const std::size_t del = naive_distance(a, b, i + 1, j) + 1;
  const std::size_t ins = naive_distance(a, b, i, j + 1) + 1;
  return std::min({sub, del, ins});
}

Words random_words(Rng& rng, std::size_t max_len) {
  static const Words vocab = {"a", "b", "c"};
  Words out(rng.index(max_len + 1));
  for (auto& w : out) w = vocab[rng.index(vocab.size())];
  return out;
}

}  // namespace

TEST_CASE("tokenize splits on whitespace only") {
  CHECK(tokenize("a b  c") == Words{"a", "b", "c"});
  CHECK(tokenize("  hello\tworld\n") == Words{"hello", "world"});
  CHECK(tokenize("") == Words{});
  CHECK(tokenize("సుగర్ లెవల్") == Words{"సుగర్", "లెవల్"});
}

TEST_CASE("edit_distance identity and simple cases") {
  const Words abc{"a", "b", "c"};
  auto s = edit_distance(abc, abc);
  CHECK(s.substitutions == 0);
  CHECK(s.insertions == 0);
  CHECK(s.deletions == 0);
  CHECK(s.wer == 0.0);

  s = edit_distance(abc, Words{"a", "c"});
  CHECK(s.deletions == 1);
  CHECK(s.substitutions == 0);
  CHECK(s.insertions == 0);
  CHECK(s.wer == doctest::Approx(1.0 / 3.0));

  s = edit_distance(abc, Words{"a", "x", "c"});
  CHECK(s.substitutions == 1);
  CHECK(s.wer == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("edit_distance backtrace tie-break prefers substitution") {
  // "a" vs "b c": cost 2 either as sub+ins or ins+sub; the backtrace must
  // pick the substitution branch first.
  const auto s = edit_distance(Words{"a"}, Words{"b", "c"});
  CHECK(s.substitutions == 1);
  CHECK(s.insertions == 1);
  CHECK(s.deletions == 0);
}

TEST_CASE("edit_distance rejects empty reference") {
  CHECK_THROWS_AS(edit_distance(Words{}, Words{"a"}), ValidationError);
  CHECK_THROWS_AS(word_error_rate("", "x"), ValidationError);
  CHECK_THROWS_AS(word_error_rate("   ", "x"), ValidationError);
}

TEST_CASE("edit_distance matches exhaustive oracle on 500 random pairs") {
  Rng rng(20240901);
  int checked = 0;
  while (checked < 500) {
    const Words a = random_words(rng, 6);
    const Words b = random_words(rng, 6);
    if (a.empty()) continue;
    ++checked;
    const auto s = edit_distance(a, b);
    const std::size_t expected = naive_distance(a, b, 0, 0);
    CHECK(s.substitutions + s.insertions + s.deletions == expected);
  }
}

TEST_CASE("distance symmetry and triangle inequality") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Words a = random_words(rng, 5);
    Words b = random_words(rng, 5);
    Words c = random_words(rng, 5);
    if (a.empty() || b.empty() || c.empty()) continue;
    const auto dab = edit_distance(a, b);
    const auto dba = edit_distance(b, a);
    const std::size_t ab = dab.substitutions + dab.insertions + dab.deletions;
    const std::size_t ba = dba.substitutions + dba.insertions + dba.deletions;
    CHECK(ab == ba);
    const auto dac = edit_distance(a, c);
    const auto dcb = edit_distance(c, b);
    CHECK(ab <= dac.substitutions + dac.insertions + dac.deletions +
                    dcb.substitutions + dcb.insertions + dcb.deletions);
  }
}

TEST_CASE("EditSummary alignment feasibility invariant") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const Words a = random_words(rng, 6);
    const Words b = random_words(rng, 6);
    if (a.empty()) continue;
    const auto s = edit_distance(a, b);
    CHECK(s.substitutions + s.deletions <= s.ref_len + s.insertions);
    CHECK((s.wer == 0.0) == (a == b));
  }
}

TEST_CASE("word_error_rate examples") {
  CHECK(word_error_rate("a b c", "a b c") == 0.0);
  CHECK(word_error_rate("a", "x y z") == doctest::Approx(3.0));
  CHECK(word_error_rate("సుగర్ లెవల్ చెక్", "సుగర్ లెవల్") ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("char_edit_distance operates on code points") {
  CHECK(char_edit_distance("abc", "abc") == 0);
  CHECK(char_edit_distance("abc", "axc") == 1);
  CHECK(char_edit_distance("abc", "") == 3);
  // U+0C38 U+0C41 ... multibyte sequences count as single units
  CHECK(char_edit_distance("సుగర్", "సుగర") == 1);
  CHECK(char_edit_distance("సుగర్", "సుగర్") == 0);
  CHECK(decode_utf8("సుగర్").size() == 5);
}
