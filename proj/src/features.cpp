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

#include "acecefr/features.hpp"

#include <cmath>
#include <cstdint>
#include <algorithm>

#include "acecefr/error.hpp"
#include "json.hpp"

namespace acecefr::features {
namespace {

struct CodePoint {
  char32_t value;
  std::size_t offset;  // byte offset of the first byte
  std::size_t width;   // in bytes
};

// Lenient UTF-8 decoding: an invalid byte decodes as U+FFFD of width 1.
std::vector<CodePoint> Decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t width = 1;
    char32_t cp = 0xFFFD;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      width = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      width = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      width = 4;
      cp = b0 & 0x07;
    } else {
      width = 0;
    }
    bool valid = width > 0 && i + width <= s.size();
    for (std::size_t k = 1; valid && k < width; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!valid) {
      out.push_back({0xFFFD, i, 1});
      ++i;
      continue;
    }
    out.push_back({cp, i, width});
    i += width;
  }
  return out;
}

bool IsSpace(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f' || c == 0x00A0 || (c >= 0x2000 && c <= 0x200A) ||
         c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

// ASCII letters and digits, plus non-ASCII code points outside the
// punctuation and symbol blocks.
bool IsWordChar(char32_t c) {
  if (c < 0x80) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9');
  }
  if (c < 0xC0 || c == 0xD7 || c == 0xF7 || c == 0xFFFD) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c >= 0xFE00 && c <= 0xFE6F) return false;
  if (c >= 0xFF00 && c <= 0xFF20) return false;
  if (c >= 0x1F000) return false;
  return true;
}

bool IsJoiner(char32_t c) {
  return c == '\'' || c == 0x2019 || c == '-' || c == 0x2010 || c == 0x2011;
}

bool IsTerminator(char32_t c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

std::vector<Token> Tokenize(std::string_view text) {
  const auto cps = Decode(text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!IsWordChar(cps[i].value)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    ++i;
    for (;;) {
      if (i < cps.size() && IsWordChar(cps[i].value)) {
        ++i;
      } else if (i + 1 < cps.size() && IsJoiner(cps[i].value) &&
                 IsWordChar(cps[i + 1].value)) {
        i += 2;
      } else {
        break;
      }
    }
    const std::size_t begin = cps[start].offset;
    const std::size_t end = cps[i - 1].offset + cps[i - 1].width;
    tokens.push_back({std::string(text.substr(begin, end - begin)), i - start});
  }
  return tokens;
}

std::size_t CountTokens(std::string_view text) { return Tokenize(text).size(); }

std::vector<Sentence> SegmentSentences(std::string_view text) {
  const auto cps = Decode(text);
  std::vector<Sentence> sentences;

  auto emit = [&](std::size_t from, std::size_t to) {
    while (from < to && IsSpace(cps[from].value)) ++from;
    while (to > from && IsSpace(cps[to - 1].value)) --to;
    if (from == to) return;
    const std::size_t begin = cps[from].offset;
    const std::size_t end = cps[to - 1].offset + cps[to - 1].width;
    sentences.push_back({std::string(text.substr(begin, end - begin)), to - from});
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!IsTerminator(cps[i].value)) {
      ++i;
      continue;
    }
    while (i < cps.size() && IsTerminator(cps[i].value)) ++i;
    if (i == cps.size() || IsSpace(cps[i].value)) {
      emit(start, i);
      start = i;
    }
  }
  emit(start, cps.size());
  return sentences;
}

SurfaceFeatures Extract(std::string_view text) {
  const auto tokens = Tokenize(text);
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyText, "text contains no tokens");
  }
  const auto sentences = SegmentSentences(text);

  std::size_t token_chars = 0;
  for (const auto& t : tokens) token_chars += t.length;
  std::size_t sentence_chars = 0;
  for (const auto& s : sentences) sentence_chars += s.length;

  SurfaceFeatures f;
  f.token_count = tokens.size();
  // A tokenizable text always yields at least one non-empty sentence.
  f.sentence_count = sentences.size();
  const auto n_tok = static_cast<double>(f.token_count);
  const auto n_sent = static_cast<double>(f.sentence_count);
  f.avg_word_len_chars = static_cast<double>(token_chars) / n_tok;
  f.avg_sent_len_chars = static_cast<double>(sentence_chars) / n_sent;
  f.avg_sent_len_words = n_tok / n_sent;
  f.ln_sent_len_chars = std::log(std::max(f.avg_sent_len_chars, 1.0));
  f.ln_sent_len_words = std::log(std::max(f.avg_sent_len_words, 1.0));
  return f;
}

std::string ToJson(const SurfaceFeatures& f) {
  nlohmann::ordered_json j;
  j["avg_word_len_chars"] = f.avg_word_len_chars;
  j["avg_sent_len_chars"] = f.avg_sent_len_chars;
  j["avg_sent_len_words"] = f.avg_sent_len_words;
  j["ln_sent_len_chars"] = f.ln_sent_len_chars;
  j["ln_sent_len_words"] = f.ln_sent_len_words;
  j["token_count"] = f.token_count;
  j["sentence_count"] = f.sentence_count;
  return j.dump();
}

}  // namespace acecefr::features
