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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "acecefr/corpus.hpp"
#include "acecefr/llm_client.hpp"

namespace acecefr::llm {

// Single words and longer passages get separate prompts.
enum class PromptKind { kPhrase, kWord };

std::string_view PromptKindName(PromptKind kind);

// kWord iff the text is exactly one token. Throws kEmptyText.
PromptKind Route(std::string_view text);

struct FewShotExample {
  std::string text;
  double label = 0;

  bool operator==(const FewShotExample&) const = default;
};

// Uniform sample without replacement from the training passages of the given
// kind, in random order. n larger than the pool returns the whole pool
// shuffled. Throws kEmptyPool when no passage of that kind exists.
std::vector<FewShotExample> SampleFewShot(const corpus::Corpus& train, std::size_t n,
                                          std::uint64_t seed, PromptKind kind);

struct PromptBundle {
  PromptKind kind = PromptKind::kPhrase;
  std::string rendered;
  std::vector<FewShotExample> exemplars;
  std::uint64_t seed = 0;
};

// Shortest decimal that round-trips: 1 -> "1", 3.25 -> "3.25".
std::string FormatLabel(double label);

// Renders the few-shot prompt. Exemplar line breaks are folded to spaces;
// a line break in the query is rejected (kInvalidArgument).
PromptBundle BuildPrompt(PromptKind kind, std::vector<FewShotExample> exemplars,
                         std::string_view query, std::uint64_t seed = 0);

// Header, instruction line and query slot with no exemplars.
PromptBundle BuildZeroShotPrompt(PromptKind kind, std::string_view query);

// First decimal number in the completion, clamped to [1, 6]. Throws
// kUnparseableCompletion.
double ParseResponse(std::string_view completion);

struct RaterOptions {
  std::size_t runs = 3;
  std::uint64_t base_seed = 0;
  // 0 selects the zero-shot prompt.
  std::size_t n_exemplars = 64;
  std::size_t parallelism = 1;
};

struct RatingResult {
  double score = 0;
  std::vector<double> samples;
  PromptKind kind = PromptKind::kPhrase;
  std::size_t failures = 0;
};

// Averages `runs` independently prompted ratings. A run whose completion does
// not parse is retried once with a fresh exemplar sample; if that also fails
// the run counts as a failure. Throws kAllRunsFailed when nothing parsed.
RatingResult Rate(std::string_view text, const corpus::Corpus& train, LlmClient& client,
                  const RaterOptions& options);

struct TextItem {
  std::string id;
  std::string text;
};

struct BatchOptions {
  RaterOptions rater;
  // Texts labeled concurrently; file writes stay in input order.
  std::size_t parallelism = 1;
};

struct BatchSummary {
  std::size_t labeled = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

std::filesystem::path ErrorSidecarPath(const std::filesystem::path& output);

// Appends one dataset record per labeled text (ratings = per-run samples).
// Ids already present in `output` are skipped, so an interrupted run resumes
// where it stopped. Texts that cannot be rated go to the error sidecar.
BatchSummary BatchLabel(const std::vector<TextItem>& items, const corpus::Corpus& train,
                        LlmClient& client, const BatchOptions& options,
                        const std::filesystem::path& output);

}  // namespace acecefr::llm
