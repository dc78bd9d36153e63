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
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace acecefr::corpus {

inline constexpr double kMinLabel = 1.0;
inline constexpr double kMaxLabel = 6.0;

// One of the nine admissible points of the numeric CEFR scale.
class CefrRating {
 public:
  static constexpr std::size_t kCount = 9;

  // Ascending order; index doubles as the QWK class index.
  static constexpr std::array<double, kCount> kValues = {1.0, 2.0, 2.5, 3.0, 3.5,
                                                         4.0, 4.5, 5.0, 6.0};
  static constexpr std::array<std::string_view, kCount> kNames = {
      "A1", "A2", "A2+", "B1", "B1+", "B2", "B2+", "C1", "C2"};

  static CefrRating FromIndex(std::size_t index);

  std::size_t index() const { return index_; }
  double value() const { return kValues[index_]; }
  std::string_view name() const { return kNames[index_]; }

  bool operator==(const CefrRating&) const = default;

 private:
  explicit CefrRating(std::size_t index) : index_(index) {}
  std::size_t index_;
};

// Case-insensitive, whitespace-trimmed. Throws kUnknownLevel.
double ParseLevel(std::string_view name);

// Nearest admissible point; exact midpoints round up. Throws kOutOfRange
// outside [1, 6].
CefrRating LevelFromScore(double score);

// Arithmetic mean. Throws kEmptyInput on an empty list.
double Consensus(std::span<const double> ratings);

enum class Split { kTrain, kTest };

struct Passage {
  std::string id;
  std::string text;
  std::vector<double> ratings;
  double label = 0;
  std::optional<Split> split;
  std::optional<std::string> source;

  bool operator==(const Passage&) const = default;
};

struct Provenance {
  std::string path;
  std::chrono::system_clock::time_point loaded_at{};
};

class Corpus {
 public:
  Corpus() = default;
  // Validates ids, labels and texts; throws on the first violation.
  explicit Corpus(std::vector<Passage> passages, Provenance provenance = {});

  const std::vector<Passage>& passages() const { return passages_; }
  const Provenance& provenance() const { return provenance_; }
  std::size_t size() const { return passages_.size(); }
  bool empty() const { return passages_.empty(); }
  const Passage& operator[](std::size_t i) const { return passages_[i]; }
  auto begin() const { return passages_.begin(); }
  auto end() const { return passages_.end(); }

  const Passage* Find(std::string_view id) const;

  std::vector<double> Labels() const;
  std::vector<std::string> Texts() const;

  // Equality ignores provenance.
  bool operator==(const Corpus& other) const { return passages_ == other.passages_; }

 private:
  std::vector<Passage> passages_;
  Provenance provenance_;
};

// Parses one dataset line. Ratings, when present, determine the label; a
// stored label that disagrees by more than 1e-6 is rejected.
Passage ParseRecord(std::string_view line);
std::string SerializeRecord(const Passage& p);

Corpus LoadCorpus(const std::filesystem::path& path);
Corpus ParseCorpus(std::string_view contents, std::string source_name = "<memory>");
void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path);
std::string SerializeCorpus(const Corpus& corpus);

struct TrainTest {
  Corpus train;
  Corpus test;
};

// Honors split tags when present. Untagged passages are shuffled with `seed`
// and divided evenly, with the extra passage of an odd count going to train.
TrainTest SplitCorpus(const Corpus& corpus, std::uint64_t seed);

// floor(label) -> count; labels of 6 fall in bucket 6.
std::map<int, std::size_t> FloorHistogram(const Corpus& corpus);

// Downsamples every floor-level bucket to the size of the smallest one. The
// buckets from the lowest to the highest observed level must all be present.
Corpus BalancedSubsample(const Corpus& corpus, std::uint64_t seed);

}  // namespace acecefr::corpus
