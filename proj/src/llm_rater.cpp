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

#include "acecefr/llm_rater.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <exception>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "acecefr/error.hpp"
#include "acecefr/features.hpp"
#include "acecefr/rng.hpp"
#include "json.hpp"

namespace acecefr::llm {
namespace {

// The scale description shared by both prompts. The phrase prompt keeps the
// trailing space after "The levels are:".
constexpr std::string_view kLevelList =
    "- A1 (1): Beginner\n"
    "- A2 (2): Elementary\n"
    "- B1 (3): Intermediate\n"
    "- B2 (4): Upper Intermediate\n"
    "- C1 (5): Advanced\n"
    "- C2 (6): Proficiency\n";

constexpr std::string_view kPhraseHeadline =
    "CEFR is a six-level scale, with each level corresponding to a specific level of "
    "English language proficiency. The levels are: \n";
constexpr std::string_view kPhraseInstruction =
    "According to the CEFR scale, the proficiency level required to use the following "
    "phrases are:\n";

constexpr std::string_view kWordHeadline =
    "GSE is a six-level scale, with each level corresponding to a specific level of "
    "English language proficiency. The levels are:\n";
constexpr std::string_view kWordInstruction =
    "According to the GSE scale, the proficiency level required to use the following "
    "words are:\n";

std::string Preamble(PromptKind kind) {
  std::string out;
  out += kind == PromptKind::kPhrase ? kPhraseHeadline : kWordHeadline;
  out += '\n';
  out += kLevelList;
  out += '\n';
  out += kind == PromptKind::kPhrase ? kPhraseInstruction : kWordInstruction;
  out += '\n';
  return out;
}

std::string FoldLineBreaks(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::string QueryLine(PromptKind kind, std::string_view query) {
  if (kind == PromptKind::kPhrase) return "Phrase: " + std::string(query) + " -> CEFR:";
  return std::string(query) + ",";
}

void CheckQuery(std::string_view query) {
  if (query.find_first_of("\r\n") != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "prompt query must not contain a line break");
  }
}

struct RunOutcome {
  std::optional<double> score;
  std::exception_ptr error;
};

RunOutcome RunOnce(std::string_view text, PromptKind kind, const corpus::Corpus& train,
                   LlmClient& client, const RaterOptions& options, std::size_t run) {
  RunOutcome outcome;
  try {
    for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
      const std::uint64_t seed = DeriveSeed(options.base_seed, run, attempt);
      PromptBundle bundle =
          options.n_exemplars == 0
              ? BuildZeroShotPrompt(kind, text)
              : BuildPrompt(kind, SampleFewShot(train, options.n_exemplars, seed, kind), text,
                            seed);
      std::string completion;
      try {
        completion = client.Complete(bundle.rendered);
      } catch (const Error& e) {
        throw Error(e.code(), "run " + std::to_string(run) + ": " + e.what());
      }
      try {
        outcome.score = ParseResponse(completion);
        return outcome;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnparseableCompletion) throw;
      }
    }
  } catch (...) {
    outcome.error = std::current_exception();
  }
  return outcome;
}

std::set<std::string> ExistingIds(const std::filesystem::path& output) {
  std::set<std::string> ids;
  if (!std::filesystem::exists(output)) return ids;
  std::string contents;
  {
    std::ifstream in(output, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    contents = buffer.str();
  }
  // Drop a partially written final record left by an interrupted run.
  if (!contents.empty() && contents.back() != '\n') {
    const auto last_newline = contents.rfind('\n');
    const std::size_t keep = last_newline == std::string::npos ? 0 : last_newline + 1;
    contents.resize(keep);
    std::filesystem::resize_file(output, keep);
  }
  std::istringstream lines(contents);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ids.insert(corpus::ParseRecord(line).id);
  }
  return ids;
}

}  // namespace

std::string_view PromptKindName(PromptKind kind) {
  return kind == PromptKind::kWord ? "word" : "phrase";
}

PromptKind Route(std::string_view text) {
  const std::size_t tokens = features::CountTokens(text);
  if (tokens == 0) throw Error(ErrorCode::kEmptyText, "text contains no tokens");
  return tokens == 1 ? PromptKind::kWord : PromptKind::kPhrase;
}

std::vector<FewShotExample> SampleFewShot(const corpus::Corpus& train, std::size_t n,
                                          std::uint64_t seed, PromptKind kind) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const std::size_t tokens = features::CountTokens(train[i].text);
    if ((tokens == 1) == (kind == PromptKind::kWord)) pool.push_back(i);
  }
  if (pool.empty()) {
    throw Error(ErrorCode::kEmptyPool, std::string("no ") + std::string(PromptKindName(kind)) +
                                           " passages to sample exemplars from");
  }
  const std::size_t take = std::min(n, pool.size());
  // Partial Fisher-Yates: the first `take` slots end up a uniform random
  // ordered sample.
  Rng rng(seed);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.Below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<FewShotExample> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({train[pool[i]].text, train[pool[i]].label});
  }
  return out;
}

std::string FormatLabel(double label) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), label);
  return std::string(buf, res.ptr);
}

PromptBundle BuildPrompt(PromptKind kind, std::vector<FewShotExample> exemplars,
                         std::string_view query, std::uint64_t seed) {
  if (exemplars.empty()) {
    throw Error(ErrorCode::kEmptyInput, "few-shot prompt needs at least one exemplar");
  }
  CheckQuery(query);
  std::string rendered = Preamble(kind);
  for (const auto& ex : exemplars) {
    const std::string text = FoldLineBreaks(ex.text);
    if (kind == PromptKind::kPhrase) {
      rendered += "Phrase: " + text + " -> CEFR: " + FormatLabel(ex.label) + "\n";
    } else {
      rendered += text + "," + FormatLabel(ex.label) + "\n";
    }
  }
  rendered += QueryLine(kind, query);
  return {kind, std::move(rendered), std::move(exemplars), seed};
}

PromptBundle BuildZeroShotPrompt(PromptKind kind, std::string_view query) {
  CheckQuery(query);
  return {kind, Preamble(kind) + QueryLine(kind, query), {}, 0};
}

double ParseResponse(std::string_view completion) {
  const auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 0; i < completion.size(); ++i) {
    const bool starts_number =
        is_digit(completion[i]) ||
        (completion[i] == '.' && i + 1 < completion.size() && is_digit(completion[i + 1]));
    if (!starts_number) continue;
    std::size_t begin = i;
    if (begin > 0 && completion[begin - 1] == '-') --begin;
    std::size_t end = i;
    while (end < completion.size() && is_digit(completion[end])) ++end;
    if (end + 1 < completion.size() && completion[end] == '.' && is_digit(completion[end + 1])) {
      ++end;
      while (end < completion.size() && is_digit(completion[end])) ++end;
    }
    std::string number(completion.substr(begin, end - begin));
    if (number.starts_with("-.") || number.starts_with(".")) {
      number.insert(number.find('.'), "0");
    }
    double value = 0;
    std::from_chars(number.data(), number.data() + number.size(), value);
    return std::clamp(value, corpus::kMinLabel, corpus::kMaxLabel);
  }
  throw Error(ErrorCode::kUnparseableCompletion,
              "no number in completion '" + std::string(completion.substr(0, 80)) + "'");
}

RatingResult Rate(std::string_view text, const corpus::Corpus& train, LlmClient& client,
                  const RaterOptions& options) {
  if (options.runs == 0) throw Error(ErrorCode::kInvalidArgument, "runs must be at least 1");
  const PromptKind kind = Route(text);

  std::vector<RunOutcome> outcomes(options.runs);
  const std::size_t workers = std::clamp<std::size_t>(options.parallelism, 1, options.runs);
  if (workers == 1) {
    for (std::size_t i = 0; i < options.runs; ++i) {
      outcomes[i] = RunOnce(text, kind, train, client, options, i);
    }
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        for (std::size_t i = w; i < options.runs; i += workers) {
          outcomes[i] = RunOnce(text, kind, train, client, options, i);
        }
      });
    }
  }

  RatingResult result;
  result.kind = kind;
  for (const auto& o : outcomes) {
    if (o.error) std::rethrow_exception(o.error);
    if (o.score) {
      result.samples.push_back(*o.score);
    } else {
      ++result.failures;
    }
  }
  if (result.samples.empty()) {
    throw Error(ErrorCode::kAllRunsFailed,
                "all " + std::to_string(options.runs) + " runs returned unparseable completions");
  }
  result.score = corpus::Consensus(result.samples);
  return result;
}

std::filesystem::path ErrorSidecarPath(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".errors.jsonl");
}

BatchSummary BatchLabel(const std::vector<TextItem>& items, const corpus::Corpus& train,
                        LlmClient& client, const BatchOptions& options,
                        const std::filesystem::path& output) {
  if (items.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to label");
  const std::set<std::string> done = ExistingIds(output);

  std::ofstream out(output, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + output.string());
  std::ofstream sidecar;

  std::vector<const TextItem*> pending;
  BatchSummary summary;
  std::set<std::string> queued;
  for (const auto& item : items) {
    if (done.contains(item.id) || !queued.insert(item.id).second) {
      ++summary.skipped;
    } else {
      pending.push_back(&item);
    }
  }

  struct Slot {
    std::optional<RatingResult> result;
    std::string error_code;
    std::string error_message;
  };

  auto label_one = [&](const TextItem& item) {
    Slot slot;
    RaterOptions rater = options.rater;
    rater.base_seed = DeriveSeed(options.rater.base_seed, StableHash(item.id));
    try {
      slot.result = Rate(item.text, train, client, rater);
    } catch (const Error& e) {
      slot.error_code = std::string(e.name());
      slot.error_message = e.what();
    }
    return slot;
  };

  // Windows of `parallelism` texts run concurrently; each window is written
  // in input order before the next starts.
  const std::size_t window = std::max<std::size_t>(options.parallelism, 1);
  for (std::size_t begin = 0; begin < pending.size(); begin += window) {
    const std::size_t end = std::min(begin + window, pending.size());
    std::vector<Slot> slots(end - begin);
    {
      std::vector<std::jthread> threads;
      for (std::size_t i = begin; i < end; ++i) {
        if (window == 1) {
          slots[i - begin] = label_one(*pending[i]);
        } else {
          threads.emplace_back([&, i] { slots[i - begin] = label_one(*pending[i]); });
        }
      }
    }
    for (std::size_t i = begin; i < end; ++i) {
      const Slot& slot = slots[i - begin];
      const TextItem& item = *pending[i];
      if (slot.result) {
        corpus::Passage p;
        p.id = item.id;
        p.text = item.text;
        p.ratings = slot.result->samples;
        p.label = slot.result->score;
        p.source = "llm";
        out << corpus::SerializeRecord(p) << '\n';
        ++summary.labeled;
      } else {
        if (!sidecar.is_open()) {
          sidecar.open(ErrorSidecarPath(output), std::ios::binary | std::ios::app);
        }
        nlohmann::ordered_json j;
        j["id"] = item.id;
        j["error"] = slot.error_code;
        j["message"] = slot.error_message;
        sidecar << j.dump() << '\n';
        ++summary.failed;
      }
    }
    out.flush();
    if (sidecar.is_open()) sidecar.flush();
  }
  return summary;
}

}  // namespace acecefr::llm
