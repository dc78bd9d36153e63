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

#include <algorithm>
#include <random>
#include <set>

#include "acecefr/corpus.hpp"
#include "acecefr/error.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace acecefr;
using namespace acecefr::corpus;

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

Corpus MakeCorpus(const std::vector<double>& labels) {
  std::vector<Passage> ps;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Passage p;
    p.id = "p" + std::to_string(i);
    p.text = "passage number " + std::to_string(i);
    p.label = labels[i];
    ps.push_back(p);
  }
  return Corpus(std::move(ps));
}

std::multiset<std::string> Ids(const Corpus& c) {
  std::multiset<std::string> out;
  for (const auto& p : c) out.insert(p.id);
  return out;
}

}  // namespace

TEST_CASE("parse_level maps the nine labels") {
  CHECK(ParseLevel("A1") == 1.0);
  CHECK(ParseLevel("A2+") == 2.5);
  CHECK(ParseLevel(" b1+ ") == 3.5);
  CHECK(ParseLevel("c2") == 6.0);
  CHECK(CodeOf([] { ParseLevel("C1+"); }) == ErrorCode::kUnknownLevel);
  CHECK(CodeOf([] { ParseLevel("A0"); }) == ErrorCode::kUnknownLevel);
  try {
    ParseLevel("C1+");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("C1+") != std::string::npos);
  }
}

TEST_CASE("level_from_score picks the nearest point, ties up") {
  CHECK(LevelFromScore(3.5).name() == "B1+");
  CHECK(LevelFromScore(2.75).name() == "B1");
  CHECK(LevelFromScore(5.4).name() == "C1");
  CHECK(LevelFromScore(1.5).name() == "A2");
  CHECK(LevelFromScore(5.5).name() == "C2");
  CHECK(LevelFromScore(1.0).name() == "A1");
  CHECK(CodeOf([] { LevelFromScore(0.99); }) == ErrorCode::kOutOfRange);
  CHECK(CodeOf([] { LevelFromScore(6.01); }) == ErrorCode::kOutOfRange);
}

TEST_CASE("parse_level and level_from_score are inverse on the nine points") {
  for (std::size_t i = 0; i < CefrRating::kCount; ++i) {
    const auto name = CefrRating::kNames[i];
    CHECK(LevelFromScore(ParseLevel(name)).name() == name);
  }
}

TEST_CASE("consensus") {
  CHECK(Consensus(std::vector<double>{2.5, 3.0}) == 2.75);
  CHECK(Consensus(std::vector<double>{4.0}) == 4.0);
  CHECK(Consensus(std::vector<double>{1, 6}) == 3.5);
  CHECK(CodeOf([] { Consensus(std::vector<double>{}); }) == ErrorCode::kEmptyInput);

  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(1 + gen() % 6);
    for (auto& v : r) v = CefrRating::kValues[gen() % CefrRating::kCount];
    const double c = Consensus(r);
    CHECK(c >= *std::min_element(r.begin(), r.end()));
    CHECK(c <= *std::max_element(r.begin(), r.end()));
    std::shuffle(r.begin(), r.end(), gen);
    CHECK(Consensus(r) == doctest::Approx(c).epsilon(1e-15));
  }
}

TEST_CASE("record parsing") {
  const auto p = ParseRecord(R"({"id":"p1","text":"Hello.","ratings":[1,1]})");
  CHECK(p.label == 1.0);
  CHECK(p.ratings.size() == 2);

  CHECK(ParseRecord(R"({"id":"p2","text":"Hi","label":2.75,"split":"test"})").split ==
        Split::kTest);
  CHECK(CodeOf([] { ParseRecord(R"({"id":"p","text":"Hi","label":7})"); }) ==
        ErrorCode::kLabelOutOfRange);
  CHECK(CodeOf([] { ParseRecord(R"({"id":"p","text":"Hi","ratings":[0.5]})"); }) ==
        ErrorCode::kLabelOutOfRange);
  CHECK(CodeOf([] { ParseRecord(R"({"id":"p","text":"Hi"})"); }) ==
        ErrorCode::kMalformedRecord);
  CHECK(CodeOf([] { ParseRecord(R"({"id":"p","text":"Hi","ratings":[2,3],"label":2})"); }) ==
        ErrorCode::kLabelMismatch);
  CHECK(CodeOf([] { ParseRecord("not json"); }) == ErrorCode::kMalformedRecord);
  CHECK(CodeOf([] { ParseRecord(R"({"id":"p","text":"Hi","label":2,"split":"dev"})"); }) ==
        ErrorCode::kMalformedRecord);
  // A stored label within 1e-6 of the mean is accepted; the mean wins.
  CHECK(ParseRecord(R"({"id":"p","text":"Hi","ratings":[2,3],"label":2.5000001})").label == 2.5);
}

TEST_CASE("load_corpus validates and reports the record") {
  testing::TempDir dir;
  testing::WriteFile(dir / "ok.jsonl",
                     "{\"id\":\"a\",\"text\":\"Hello.\",\"ratings\":[1,1]}\n\n"
                     "{\"id\":\"b\",\"text\":\"I have lived here since I was 4.\",\"ratings\":[2.5,3]}\r\n");
  const auto c = LoadCorpus(dir / "ok.jsonl");
  REQUIRE(c.size() == 2);
  CHECK(c[1].label == 2.75);
  CHECK(c.provenance().path.find("ok.jsonl") != std::string::npos);

  testing::WriteFile(dir / "dup.jsonl",
                     "{\"id\":\"a\",\"text\":\"x\",\"label\":1}\n{\"id\":\"a\",\"text\":\"y\",\"label\":2}\n");
  CHECK(CodeOf([&] { LoadCorpus(dir / "dup.jsonl"); }) == ErrorCode::kDuplicateId);

  testing::WriteFile(dir / "bad.jsonl", "{\"id\":\"zz\",\"text\":\"x\",\"label\":7}\n");
  try {
    LoadCorpus(dir / "bad.jsonl");
    FAIL("expected LabelOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLabelOutOfRange);
    CHECK(std::string(e.what()).find("zz") != std::string::npos);
    CHECK(std::string(e.what()).find(":1:") != std::string::npos);
  }

  testing::WriteFile(dir / "notext.jsonl", "{\"id\":\"q\",\"text\":\"?!\",\"label\":1}\n");
  CHECK(CodeOf([&] { LoadCorpus(dir / "notext.jsonl"); }) == ErrorCode::kEmptyText);
  CHECK(CodeOf([&] { LoadCorpus(dir / "missing.jsonl"); }) == ErrorCode::kIo);

  testing::WriteFile(dir / "empty.jsonl", "");
  CHECK(LoadCorpus(dir / "empty.jsonl").empty());
}

TEST_CASE("load then save then load is byte stable") {
  testing::TempDir dir;
  testing::WriteFile(dir / "in.jsonl",
                     "{\"text\":\"Hi\",\"id\":\"x\",\"ratings\":[1,2.5,3]}\n"
                     "{\"id\":\"y\",\"text\":\"caf\xC3\xA9 \\\"quoted\\\"\",\"label\":4.5,\"source\":\"web\",\"split\":\"train\"}\n");
  const auto first = LoadCorpus(dir / "in.jsonl");
  SaveCorpus(first, dir / "a.jsonl");
  const auto second = LoadCorpus(dir / "a.jsonl");
  SaveCorpus(second, dir / "b.jsonl");
  CHECK(first == second);
  CHECK(testing::ReadFile(dir / "a.jsonl") == testing::ReadFile(dir / "b.jsonl"));
  CHECK(second[0].label == Consensus(std::vector<double>{1, 2.5, 3}));
}

TEST_CASE("split_corpus") {
  SUBCASE("even split of untagged passages") {
    const auto c = MakeCorpus(std::vector<double>(890, 3.0));
    const auto s = SplitCorpus(c, 42);
    CHECK(s.train.size() == 445);
    CHECK(s.test.size() == 445);
  }
  SUBCASE("odd count puts the extra passage in train") {
    const auto s = SplitCorpus(MakeCorpus({1, 2, 3}), 1);
    CHECK(s.train.size() == 2);
    CHECK(s.test.size() == 1);
  }
  SUBCASE("partition and determinism") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 999ULL}) {
      const auto c = MakeCorpus(std::vector<double>(37, 2.0));
      const auto a = SplitCorpus(c, seed);
      const auto b = SplitCorpus(c, seed);
      CHECK(a.train == b.train);
      CHECK(a.test == b.test);
      auto all = Ids(a.train);
      for (const auto& id : Ids(a.test)) {
        CHECK(!all.contains(id));
        all.insert(id);
      }
      CHECK(all == Ids(c));
    }
    CHECK(!(SplitCorpus(MakeCorpus(std::vector<double>(40, 2.0)), 1).train ==
            SplitCorpus(MakeCorpus(std::vector<double>(40, 2.0)), 2).train));
  }
  SUBCASE("tags are honored") {
    std::vector<Passage> ps;
    for (int i = 0; i < 6; ++i) {
      Passage p;
      p.id = "t" + std::to_string(i);
      p.text = "word";
      p.label = 2;
      p.split = i < 2 ? Split::kTrain : Split::kTest;
      ps.push_back(p);
    }
    const auto s = SplitCorpus(Corpus(ps), 5);
    CHECK(s.train.size() == 2);
    CHECK(s.test.size() == 4);
    CHECK(s.train[0].id == "t0");
  }
}

TEST_CASE("floor_histogram") {
  CHECK(FloorHistogram(MakeCorpus({2.5, 2.0})) == std::map<int, std::size_t>{{2, 2}});
  CHECK(FloorHistogram(Corpus{}).empty());
  CHECK(FloorHistogram(MakeCorpus({1, 1.5, 5.99, 6})) ==
        std::map<int, std::size_t>{{1, 2}, {5, 1}, {6, 1}});
}

TEST_CASE("balanced_subsample") {
  SUBCASE("downsamples to the smallest bucket") {
    const auto c = MakeCorpus({1, 1, 1.5, 2, 2.5, 2, 2, 2.5});
    const auto b = BalancedSubsample(c, 9);
    CHECK(FloorHistogram(b) == std::map<int, std::size_t>{{1, 3}, {2, 3}});
    CHECK(BalancedSubsample(c, 9) == b);
  }
  SUBCASE("already balanced keeps everything") {
    const auto c = MakeCorpus({1, 2, 3, 4, 5, 6, 1.5, 2.5, 3.5, 4.5, 5.5, 6});
    CHECK(Ids(BalancedSubsample(c, 4)) == Ids(c));
  }
  SUBCASE("full-size level distribution") {
    std::vector<double> labels;
    const std::map<int, int> counts = {{1, 131}, {2, 180}, {3, 169}, {4, 186}, {5, 107}, {6, 116}};
    for (const auto& [level, count] : counts) {
      for (int i = 0; i < count; ++i) labels.push_back(level);
    }
    const auto b = BalancedSubsample(MakeCorpus(labels), 42);
    CHECK(b.size() == 6 * 107);
    for (const auto& [level, count] : FloorHistogram(b)) CHECK(count == 107);
  }
  SUBCASE("a gap in the levels is an error naming it") {
    try {
      BalancedSubsample(MakeCorpus({1, 3, 4}), 0);
      FAIL("expected MissingLevels");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMissingLevels);
      CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
  }
}
