/*
 * Copyright 2026 The acecefr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <random>

#include "acecefr/error.hpp"
#include "acecefr/features.hpp"
#include "doctest.h"

using namespace acecefr;
using namespace acecefr::features;

namespace {

std::vector<std::string> TokenTexts(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : Tokenize(text)) out.push_back(t.text);
  return out;
}

}  // namespace

TEST_CASE("tokenize splits on punctuation and whitespace") {
  CHECK(TokenTexts("The cat is here.") == std::vector<std::string>{"The", "cat", "is", "here"});
  CHECK(Tokenize("").empty());
  CHECK(Tokenize("  ... !? ").empty());
}

TEST_CASE("internal apostrophes and hyphens join a token") {
  const auto tokens = Tokenize("isn't");
  REQUIRE(tokens.size() == 1);
  CHECK(tokens[0].text == "isn't");
  CHECK(tokens[0].length == 5);

  CHECK(TokenTexts("well-known rock--n 'quoted' dogs'") ==
        std::vector<std::string>{"well-known", "rock", "n", "quoted", "dogs"});
  // Typographic apostrophe joins too.
  CHECK(TokenTexts("don\xE2\x80\x99t") == std::vector<std::string>{"don\xE2\x80\x99t"});
}

TEST_CASE("digits are word characters") {
  const auto tokens = Tokenize("I was 4");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[2].text == "4");
  CHECK(tokens[2].length == 1);
}

TEST_CASE("token length counts code points, not bytes") {
  const auto tokens = Tokenize("caf\xC3\xA9 na\xC3\xAFve");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0].length == 4);
  CHECK(tokens[1].length == 5);
}

TEST_CASE("sentence segmentation") {
  SUBCASE("two terminated sentences") {
    const auto s = SegmentSentences("I like dogs. I like cats.");
    REQUIRE(s.size() == 2);
    CHECK(s[0].text == "I like dogs.");
    CHECK(s[0].length == 12);
    CHECK(s[1].length == 12);
  }
  SUBCASE("a terminator run is one boundary") {
    const auto s = SegmentSentences("Really?!");
    REQUIRE(s.size() == 1);
    CHECK(s[0].text == "Really?!");
  }
  SUBCASE("unterminated text is a sentence") {
    const auto s = SegmentSentences("hobby");
    REQUIRE(s.size() == 1);
    CHECK(s[0].length == 5);
  }
  SUBCASE("terminator not followed by whitespace does not split") {
    CHECK(SegmentSentences("It costs 3.50 now. OK").size() == 2);
    CHECK(SegmentSentences("e.g.this").size() == 1);
  }
  SUBCASE("surrounding whitespace is trimmed") {
    const auto s = SegmentSentences("  Hi there!   Bye.  ");
    REQUIRE(s.size() == 2);
    CHECK(s[0].text == "Hi there!");
    CHECK(s[1].text == "Bye.");
  }
  CHECK(SegmentSentences("").empty());
  CHECK(SegmentSentences("   ").empty());
}

TEST_CASE("extract on the reference examples") {
  const auto cat = Extract("The cat is here.");
  CHECK(cat.avg_word_len_chars == 3.0);
  CHECK(cat.avg_sent_len_chars == 16.0);
  CHECK(cat.avg_sent_len_words == 4.0);
  CHECK(cat.token_count == 4);
  CHECK(cat.sentence_count == 1);
  CHECK(cat.ln_sent_len_chars == doctest::Approx(std::log(16.0)).epsilon(1e-12));

  // Content-blind features: a C1 sentence looks exactly like an A1 one.
  CHECK(Extract("His ire is epic.") == cat);

  const auto hobby = Extract("hobby");
  CHECK(hobby.avg_word_len_chars == 5.0);
  CHECK(hobby.avg_sent_len_words == 1.0);
  CHECK(hobby.ln_sent_len_words == 0.0);
}

TEST_CASE("extract rejects text without tokens") {
  CHECK_THROWS_AS(Extract(""), Error);
  try {
    Extract("?!");
    FAIL("expected EmptyText");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyText);
  }
}

TEST_CASE("feature invariants over random texts") {
  std::mt19937_64 gen(7);
  const std::vector<std::string> words = {"a", "I", "cat", "isn't", "extraordinary", "4",
                                          "well-known", "rooibos", "x"};
  const std::vector<std::string> seps = {" ", "  ", ". ", "! ", "? ", ", ", "... "};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    std::string spaced;
    const int n = 1 + static_cast<int>(gen() % 25);
    for (int i = 0; i < n; ++i) {
      const auto& w = words[gen() % words.size()];
      text += w;
      spaced += w;
      if (i + 1 < n) {
        const auto& s = seps[gen() % seps.size()];
        text += s;
        spaced += s + "  ";
      }
    }
    const auto f = Extract(text);
    CHECK(f.avg_word_len_chars > 0);
    CHECK(f.avg_sent_len_chars > 0);
    CHECK(f.avg_sent_len_words > 0);
    CHECK(f.ln_sent_len_words >= 0);
    CHECK(f.ln_sent_len_chars == doctest::Approx(std::log(std::max(f.avg_sent_len_chars, 1.0))).epsilon(1e-12));
    CHECK(f.ln_sent_len_words == doctest::Approx(std::log(std::max(f.avg_sent_len_words, 1.0))).epsilon(1e-12));

    // Token-derived fields ignore surrounding and repeated whitespace.
    const auto g = Extract("  \t" + spaced + "\n ");
    CHECK(g.token_count == f.token_count);
    CHECK(g.avg_word_len_chars == f.avg_word_len_chars);
    CHECK(g.sentence_count == f.sentence_count);
    CHECK(g.avg_sent_len_words == f.avg_sent_len_words);
  }
}

TEST_CASE("features json has the seven fields") {
  const auto j = ToJson(Extract("hobby"));
  for (const char* key : {"avg_word_len_chars", "avg_sent_len_chars", "avg_sent_len_words",
                          "ln_sent_len_chars", "ln_sent_len_words", "token_count",
                          "sentence_count"}) {
    CHECK(j.find(key) != std::string::npos);
  }
  CHECK(j.find('\n') == std::string::npos);
}
