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

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace acecefr::features {

// Bumped whenever tokenization or feature definitions change; linear models
// record the version they were trained against.
inline constexpr int kSchemaVersion = 1;

struct Token {
  std::string text;
  std::size_t length = 0;  // in code points
};

struct Sentence {
  std::string text;
  std::size_t length = 0;  // in code points
};

struct SurfaceFeatures {
  double avg_word_len_chars = 0;
  double avg_sent_len_chars = 0;
  double avg_sent_len_words = 0;
  double ln_sent_len_chars = 0;
  double ln_sent_len_words = 0;
  std::size_t token_count = 0;
  std::size_t sentence_count = 0;

  // The three regressors used by the linear model, in model order.
  std::array<double, 3> ModelInputs() const {
    return {avg_word_len_chars, ln_sent_len_chars, ln_sent_len_words};
  }

  bool operator==(const SurfaceFeatures&) const = default;
};

// Tokens are maximal runs of letters and digits, joined across a single
// internal apostrophe or hyphen. Everything else separates.
std::vector<Token> Tokenize(std::string_view text);

std::size_t CountTokens(std::string_view text);

// Splits after a run of '.', '!' or '?' that is followed by whitespace or the
// end of text. Unterminated trailing text forms the last sentence.
std::vector<Sentence> SegmentSentences(std::string_view text);

// Throws Error(kEmptyText) when the text has no tokens.
SurfaceFeatures Extract(std::string_view text);

std::string ToJson(const SurfaceFeatures& f);

}  // namespace acecefr::features
