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

#include <atomic>
#include <set>

#include "acecefr/corpus.hpp"
#include "acecefr/error.hpp"
#include "acecefr/llm_client.hpp"
#include "acecefr/llm_rater.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace acecefr;
using namespace acecefr::llm;

namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an acecefr::Error");
  return ErrorCode::kInvalidArgument;
}

constexpr std::string_view kLevels =
    "- A1 (1): Beginner\n"
    "- A2 (2): Elementary\n"
    "- B1 (3): Intermediate\n"
    "- B2 (4): Upper Intermediate\n"
    "- C1 (5): Advanced\n"
    "- C2 (6): Proficiency\n";

corpus::Corpus TrainCorpus(std::size_t phrases, std::size_t words) {
  std::vector<corpus::Passage> ps;
  for (std::size_t i = 0; i < phrases; ++i) {
    corpus::Passage p;
    p.id = "ph" + std::to_string(i);
    p.text = "Phrase number " + std::to_string(i) + " here.";
    p.label = 1.0 + static_cast<double>(i % 11) * 0.5;
    ps.push_back(p);
  }
  for (std::size_t i = 0; i < words; ++i) {
    corpus::Passage p;
    p.id = "w" + std::to_string(i);
    p.text = "word" + std::to_string(i);
    p.label = 1.0 + static_cast<double>(i % 6);
    ps.push_back(p);
  }
  return corpus::Corpus(ps);
}

std::size_t CountLines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("route partitions texts by token count") {
  CHECK(Route("hobby") == PromptKind::kWord);
  CHECK(Route("isn't") == PromptKind::kWord);
  CHECK(Route("  hobby!  ") == PromptKind::kWord);
  CHECK(Route("You are welcome!") == PromptKind::kPhrase);
  CHECK(CodeOf([] { Route("..."); }) == ErrorCode::kEmptyText);
  CHECK(PromptKindName(PromptKind::kWord) == "word");
  CHECK(PromptKindName(PromptKind::kPhrase) == "phrase");
}

TEST_CASE("few-shot sampling") {
  const auto train = TrainCorpus(418, 27);
  const auto phrases = SampleFewShot(train, 64, 5, PromptKind::kPhrase);
  CHECK(phrases.size() == 64);
  std::set<std::string> distinct;
  for (const auto& ex : phrases) {
    distinct.insert(ex.text);
    CHECK(Route(ex.text) == PromptKind::kPhrase);
  }
  CHECK(distinct.size() == 64);

  const auto words = SampleFewShot(train, 64, 5, PromptKind::kWord);
  CHECK(words.size() == 27);
  for (const auto& ex : words) CHECK(Route(ex.text) == PromptKind::kWord);

  CHECK(SampleFewShot(train, 64, 5, PromptKind::kPhrase) == phrases);
  CHECK(!(SampleFewShot(train, 64, 6, PromptKind::kPhrase) == phrases));
  CHECK(CodeOf([] { SampleFewShot(TrainCorpus(4, 0), 3, 1, PromptKind::kWord); }) ==
        ErrorCode::kEmptyPool);
}

TEST_CASE("phrase prompt renders byte for byte") {
  const auto bundle = BuildPrompt(PromptKind::kPhrase,
                                  {{"You are welcome!", 1.0},
                                   {"I wonder if there's any treasure.", 3.25}},
                                  "Where is the station?", 11);
  const std::string expected =
      "CEFR is a six-level scale, with each level corresponding to a specific level of "
      "English language proficiency. The levels are: \n\n" +
      std::string(kLevels) +
      "\nAccording to the CEFR scale, the proficiency level required to use the following "
      "phrases are:\n\n"
      "Phrase: You are welcome! -> CEFR: 1\n"
      "Phrase: I wonder if there's any treasure. -> CEFR: 3.25\n"
      "Phrase: Where is the station? -> CEFR:";
  CHECK(bundle.rendered == expected);
  CHECK(bundle.kind == PromptKind::kPhrase);
  CHECK(bundle.seed == 11);
  CHECK(bundle.exemplars.size() == 2);
}

TEST_CASE("word prompt renders byte for byte") {
  const auto bundle = BuildPrompt(PromptKind::kWord, {{"age", 1.0}, {"almost", 2.0}}, "hobby");
  const std::string expected =
      "GSE is a six-level scale, with each level corresponding to a specific level of "
      "English language proficiency. The levels are:\n\n" +
      std::string(kLevels) +
      "\nAccording to the GSE scale, the proficiency level required to use the following "
      "words are:\n\n"
      "age,1\n"
      "almost,2\n"
      "hobby,";
  CHECK(bundle.rendered == expected);
}

TEST_CASE("prompt rules") {
  CHECK(FormatLabel(1.0) == "1");
  CHECK(FormatLabel(3.25) == "3.25");
  CHECK(FormatLabel(2.5) == "2.5");
  CHECK(CodeOf([] { BuildPrompt(PromptKind::kPhrase, {}, "x y"); }) == ErrorCode::kEmptyInput);
  CHECK(CodeOf([] { BuildPrompt(PromptKind::kPhrase, {{"a b", 1}}, "two\nlines"); }) ==
        ErrorCode::kInvalidArgument);
  const auto folded = BuildPrompt(PromptKind::kPhrase, {{"a\nb", 1}}, "q r");
  CHECK(folded.rendered.find("Phrase: a b -> CEFR: 1\n") != std::string::npos);

  const auto zero = BuildZeroShotPrompt(PromptKind::kPhrase, "Hi there");
  CHECK(zero.exemplars.empty());
  CHECK(zero.rendered.starts_with("CEFR is a six-level scale"));
  CHECK(zero.rendered.ends_with("phrases are:\n\nPhrase: Hi there -> CEFR:"));

  // Distinct exemplar lists render differently.
  const auto a = BuildPrompt(PromptKind::kPhrase, {{"x y", 2}, {"z w", 3}}, "q r");
  const auto b = BuildPrompt(PromptKind::kPhrase, {{"z w", 3}, {"x y", 2}}, "q r");
  const auto c = BuildPrompt(PromptKind::kPhrase, {{"x y", 2.25}, {"z w", 3}}, "q r");
  CHECK(a.rendered != b.rendered);
  CHECK(a.rendered != c.rendered);
}

TEST_CASE("rendered prompt contains each exemplar once, in order") {
  const auto train = TrainCorpus(50, 0);
  const auto ex = SampleFewShot(train, 10, 3, PromptKind::kPhrase);
  const auto bundle = BuildPrompt(PromptKind::kPhrase, ex, "What now?");
  std::size_t pos = 0;
  for (const auto& e : ex) {
    const std::string line = "Phrase: " + e.text + " -> CEFR: " + FormatLabel(e.label) + "\n";
    const auto at = bundle.rendered.find(line, pos);
    REQUIRE(at != std::string::npos);
    CHECK(bundle.rendered.find(line, at + 1) == std::string::npos);
    pos = at + line.size();
  }
  CHECK(bundle.rendered.ends_with("Phrase: What now? -> CEFR:"));
}

TEST_CASE("parse_response") {
  CHECK(ParseResponse(" 3.25") == 3.25);
  CHECK(ParseResponse("CEFR: 8 because...") == 6.0);
  CHECK(ParseResponse("0.5") == 1.0);
  CHECK(ParseResponse("about 4, maybe 5") == 4.0);
  CHECK(ParseResponse(".5") == 1.0);
  CHECK(CodeOf([] { ParseResponse("I cannot rate this."); }) ==
        ErrorCode::kUnparseableCompletion);
  CHECK(CodeOf([] { ParseResponse(""); }) == ErrorCode::kUnparseableCompletion);
}

TEST_CASE("rate averages the runs") {
  const auto train = TrainCorpus(30, 5);
  std::atomic<int> calls{0};
  FunctionClient client([&](const std::string&) {
    const int i = calls++;
    return std::to_string(3 + i);
  });
  RaterOptions o;
  o.runs = 3;
  o.n_exemplars = 8;
  const auto r = Rate("I like cats a lot.", train, client, o);
  CHECK(r.score == 4.0);
  CHECK(r.samples == std::vector<double>{3, 4, 5});
  CHECK(r.kind == PromptKind::kPhrase);
  CHECK(r.failures == 0);

  calls = 0;
  o.runs = 1;
  const auto one = Rate("hobby", train, client, o);
  CHECK(one.score == 3.0);
  CHECK(one.kind == PromptKind::kWord);
}

TEST_CASE("rate is deterministic under seed and runs") {
  const auto train = TrainCorpus(100, 10);
  // Completion depends on the prompt only, so exemplar choices matter.
  FunctionClient client([](const std::string& prompt) {
    const auto h = Sha256Hex(prompt);
    return std::to_string(1.0 + static_cast<double>(std::stoul(h.substr(0, 4), nullptr, 16) % 500) / 100.0);
  });
  RaterOptions o;
  o.runs = 5;
  o.base_seed = 77;
  o.n_exemplars = 16;
  const auto a = Rate("The weather is nice today.", train, client, o);
  const auto b = Rate("The weather is nice today.", train, client, o);
  CHECK(a.samples == b.samples);
  CHECK(a.score == b.score);
  o.parallelism = 4;
  CHECK(Rate("The weather is nice today.", train, client, o).samples == a.samples);
  const double lo = *std::min_element(a.samples.begin(), a.samples.end());
  const double hi = *std::max_element(a.samples.begin(), a.samples.end());
  CHECK(a.score >= lo);
  CHECK(a.score <= hi);
  o.base_seed = 78;
  CHECK(Rate("The weather is nice today.", train, client, o).samples != a.samples);
}

TEST_CASE("rate retries unparseable runs once") {
  const auto train = TrainCorpus(30, 0);
  std::atomic<int> calls{0};
  FunctionClient flaky([&](const std::string&) {
    return calls++ % 2 == 0 ? std::string("no idea") : std::string("2");
  });
  RaterOptions o;
  o.runs = 2;
  o.n_exemplars = 4;
  const auto r = Rate("A short phrase.", train, flaky, o);
  CHECK(r.samples == std::vector<double>{2, 2});
  CHECK(r.failures == 0);
  CHECK(calls == 4);

  FunctionClient hopeless([](const std::string&) { return std::string("n/a"); });
  CHECK(CodeOf([&] { Rate("A short phrase.", train, hopeless, o); }) == ErrorCode::kAllRunsFailed);

  calls = 0;
  FunctionClient half([&](const std::string&) {
    const int i = calls++;
    return i < 2 ? std::string("nothing") : std::string("5");
  });
  const auto h = Rate("A short phrase.", train, half, o);
  CHECK(h.failures == 1);
  CHECK(h.samples == std::vector<double>{5});

  FunctionClient broken([](const std::string&) -> std::string {
    throw Error(ErrorCode::kTransport, "connection refused");
  });
  try {
    Rate("A short phrase.", train, broken, o);
    FAIL("expected TransportError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTransport);
    CHECK(std::string(e.what()).find("run 0") != std::string::npos);
  }
}

TEST_CASE("transcript client replays by prompt hash") {
  CHECK(Sha256Hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  testing::TempDir dir;
  std::map<std::string, std::string> m = {{Sha256Hex("p1"), "3"}, {Sha256Hex("p2"), "4.5"}};
  WriteTranscript(m, dir / "t.jsonl");
  auto client = TranscriptClient::FromFile(dir / "t.jsonl");
  CHECK(client.size() == 2);
  CHECK(client.Complete("p2") == "4.5");
  CHECK(CodeOf([&] { client.Complete("p3"); }) == ErrorCode::kTranscriptMiss);

  FunctionClient inner([](const std::string& p) { return p + "!"; });
  RecordingClient rec(inner);
  CHECK(rec.Complete("x") == "x!");
  CHECK(rec.Entries().at(Sha256Hex("x")) == "x!");
}

TEST_CASE("batch labeling writes, resumes and records failures") {
  testing::TempDir dir;
  const auto train = TrainCorpus(30, 5);
  std::atomic<int> calls{0};
  FunctionClient client([&](const std::string& prompt) {
    ++calls;
    return prompt.ends_with("Never mind it. -> CEFR:") ? std::string("??") : std::string("3");
  });
  BatchOptions o;
  o.rater.runs = 2;
  o.rater.n_exemplars = 4;
  const std::vector<TextItem> items = {
      {"a", "Good morning."}, {"b", "hobby"}, {"c", "See you soon, my friend."}};
  const auto out = dir / "labels.jsonl";

  // First run stops after two texts.
  auto s1 = BatchLabel({items[0], items[1]}, train, client, o, out);
  CHECK(s1.labeled == 2);
  CHECK(calls == 4);

  calls = 0;
  auto s2 = BatchLabel(items, train, client, o, out);
  CHECK(s2.labeled == 1);
  CHECK(s2.skipped == 2);
  CHECK(calls == 2);

  const auto labeled = corpus::LoadCorpus(out);
  REQUIRE(labeled.size() == 3);
  CHECK(labeled[2].id == "c");
  CHECK(labeled[2].ratings == std::vector<double>{3, 3});
  CHECK(labeled[2].label == 3.0);

  // A torn final line from an interrupted write is discarded and redone.
  std::string contents = testing::ReadFile(out);
  const auto cut = contents.rfind('\n', contents.size() - 2);
  testing::WriteFile(out, contents.substr(0, cut + 1) + "{\"id\":\"c\",\"te");
  calls = 0;
  auto s3 = BatchLabel(items, train, client, o, out);
  CHECK(s3.labeled == 1);
  CHECK(testing::ReadFile(out) == contents);

  // Failures go to the sidecar only.
  auto s4 = BatchLabel({{"d", "Never mind it."}}, train, client, o, out);
  CHECK(s4.failed == 1);
  CHECK(corpus::LoadCorpus(out).size() == 3);
  const auto sidecar = testing::ReadFile(ErrorSidecarPath(out));
  CHECK(CountLines(sidecar) == 1);
  CHECK(sidecar.find("\"d\"") != std::string::npos);
  CHECK(sidecar.find("AllRunsFailed") != std::string::npos);
}

TEST_CASE("batch labeling output does not depend on parallelism") {
  testing::TempDir dir;
  const auto train = TrainCorpus(60, 6);
  FunctionClient client([](const std::string& prompt) {
    return std::to_string(1 + Sha256Hex(prompt)[0] % 5);
  });
  std::vector<TextItem> items;
  for (int i = 0; i < 12; ++i) items.push_back({"t" + std::to_string(i), "Text number " + std::to_string(i) + "."});
  BatchOptions o;
  o.rater.runs = 3;
  o.rater.n_exemplars = 5;
  BatchLabel(items, train, client, o, dir / "serial.jsonl");
  o.parallelism = 4;
  BatchLabel(items, train, client, o, dir / "parallel.jsonl");
  CHECK(testing::ReadFile(dir / "serial.jsonl") == testing::ReadFile(dir / "parallel.jsonl"));
}
