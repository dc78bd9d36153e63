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

#include "acecefr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "acecefr/error.hpp"
#include "acecefr/features.hpp"
#include "acecefr/rng.hpp"
#include "json.hpp"

namespace acecefr::corpus {
namespace {

using nlohmann::json;

constexpr double kConsensusTolerance = 1e-9;
constexpr double kStoredLabelTolerance = 1e-6;

bool InScale(double v) {
  return std::isfinite(v) && v >= kMinLabel && v <= kMaxLabel;
}

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string FormatNumber(double v) { return json(v).dump(); }

void ValidatePassage(const Passage& p) {
  if (p.id.empty()) {
    throw Error(ErrorCode::kMalformedRecord, "passage id is empty");
  }
  if (p.text.empty() || features::CountTokens(p.text) == 0) {
    throw Error(ErrorCode::kEmptyText, "passage '" + p.id + "' has no tokens");
  }
  for (double r : p.ratings) {
    if (!InScale(r)) {
      throw Error(ErrorCode::kLabelOutOfRange,
                  "passage '" + p.id + "' has rating " + FormatNumber(r) +
                      " outside [1, 6]");
    }
  }
  if (!InScale(p.label)) {
    throw Error(ErrorCode::kLabelOutOfRange, "passage '" + p.id + "' has label " +
                                                 FormatNumber(p.label) +
                                                 " outside [1, 6]");
  }
  if (!p.ratings.empty() &&
      std::abs(Consensus(p.ratings) - p.label) > kConsensusTolerance) {
    throw Error(ErrorCode::kLabelMismatch,
                "passage '" + p.id + "' label is not the mean of its ratings");
  }
}

}  // namespace

CefrRating CefrRating::FromIndex(std::size_t index) {
  if (index >= kCount) {
    throw Error(ErrorCode::kOutOfRange, "rating index " + std::to_string(index));
  }
  return CefrRating(index);
}

double ParseLevel(std::string_view name) {
  std::string key = Trim(name);
  for (auto& c : key) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < CefrRating::kCount; ++i) {
    if (key == CefrRating::kNames[i]) return CefrRating::kValues[i];
  }
  throw Error(ErrorCode::kUnknownLevel, "unknown CEFR level '" + key + "'");
}

CefrRating LevelFromScore(double score) {
  if (!InScale(score)) {
    throw Error(ErrorCode::kOutOfRange,
                "score " + FormatNumber(score) + " outside [1, 6]");
  }
  std::size_t best = 0;
  double best_dist = std::abs(score - CefrRating::kValues[0]);
  for (std::size_t i = 1; i < CefrRating::kCount; ++i) {
    const double d = std::abs(score - CefrRating::kValues[i]);
    // Ascending scan: `<=` resolves an exact tie toward the higher point.
    if (d <= best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return CefrRating::FromIndex(best);
}

double Consensus(std::span<const double> ratings) {
  if (ratings.empty()) {
    throw Error(ErrorCode::kEmptyInput, "consensus of an empty rating list");
  }
  double sum = 0;
  for (double r : ratings) sum += r;
  return sum / static_cast<double>(ratings.size());
}

Corpus::Corpus(std::vector<Passage> passages, Provenance provenance)
    : passages_(std::move(passages)), provenance_(std::move(provenance)) {
  std::unordered_set<std::string_view> seen;
  for (const auto& p : passages_) {
    ValidatePassage(p);
    if (!seen.insert(p.id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate passage id '" + p.id + "'");
    }
  }
}

const Passage* Corpus::Find(std::string_view id) const {
  for (const auto& p : passages_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::vector<double> Corpus::Labels() const {
  std::vector<double> out;
  out.reserve(passages_.size());
  for (const auto& p : passages_) out.push_back(p.label);
  return out;
}

std::vector<std::string> Corpus::Texts() const {
  std::vector<std::string> out;
  out.reserve(passages_.size());
  for (const auto& p : passages_) out.push_back(p.text);
  return out;
}

Passage ParseRecord(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kMalformedRecord, "record is not an object");
  }
  Passage p;
  if (!j.contains("id") || !j["id"].is_string()) {
    throw Error(ErrorCode::kMalformedRecord, "record lacks a string 'id'");
  }
  p.id = j["id"].get<std::string>();
  if (!j.contains("text") || !j["text"].is_string()) {
    throw Error(ErrorCode::kMalformedRecord, "record '" + p.id + "' lacks a string 'text'");
  }
  p.text = j["text"].get<std::string>();

  const bool has_ratings = j.contains("ratings") && !j["ratings"].is_null();
  const bool has_label = j.contains("label") && !j["label"].is_null();
  if (!has_ratings && !has_label) {
    throw Error(ErrorCode::kMalformedRecord,
                "record '" + p.id + "' has neither ratings nor label");
  }
  if (has_ratings) {
    if (!j["ratings"].is_array()) {
      throw Error(ErrorCode::kMalformedRecord, "record '" + p.id + "' ratings is not an array");
    }
    for (const auto& r : j["ratings"]) {
      if (!r.is_number()) {
        throw Error(ErrorCode::kMalformedRecord,
                    "record '" + p.id + "' has a non-numeric rating");
      }
      const double v = r.get<double>();
      if (!InScale(v)) {
        throw Error(ErrorCode::kLabelOutOfRange, "record '" + p.id + "' rating " +
                                                     FormatNumber(v) + " outside [1, 6]");
      }
      p.ratings.push_back(v);
    }
  }
  std::optional<double> stored;
  if (has_label) {
    if (!j["label"].is_number()) {
      throw Error(ErrorCode::kMalformedRecord, "record '" + p.id + "' label is not a number");
    }
    stored = j["label"].get<double>();
    if (!InScale(*stored)) {
      throw Error(ErrorCode::kLabelOutOfRange, "record '" + p.id + "' label " +
                                                   FormatNumber(*stored) +
                                                   " outside [1, 6]");
    }
  }
  if (!p.ratings.empty()) {
    p.label = Consensus(p.ratings);
    if (stored && std::abs(*stored - p.label) > kStoredLabelTolerance) {
      throw Error(ErrorCode::kLabelMismatch,
                  "record '" + p.id + "' stored label " + FormatNumber(*stored) +
                      " differs from rating mean " + FormatNumber(p.label));
    }
  } else if (stored) {
    p.label = *stored;
  } else {
    throw Error(ErrorCode::kMalformedRecord,
                "record '" + p.id + "' has an empty ratings list and no label");
  }

  if (j.contains("split") && !j["split"].is_null()) {
    const auto& s = j["split"];
    if (s == "train") {
      p.split = Split::kTrain;
    } else if (s == "test") {
      p.split = Split::kTest;
    } else {
      throw Error(ErrorCode::kMalformedRecord,
                  "record '" + p.id + "' split must be \"train\" or \"test\"");
    }
  }
  if (j.contains("source") && !j["source"].is_null()) {
    if (!j["source"].is_string()) {
      throw Error(ErrorCode::kMalformedRecord, "record '" + p.id + "' source is not a string");
    }
    p.source = j["source"].get<std::string>();
  }
  return p;
}

std::string SerializeRecord(const Passage& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["text"] = p.text;
  if (!p.ratings.empty()) j["ratings"] = p.ratings;
  j["label"] = p.label;
  if (p.split) j["split"] = *p.split == Split::kTrain ? "train" : "test";
  if (p.source) j["source"] = *p.source;
  return j.dump();
}

Corpus ParseCorpus(std::string_view contents, std::string source_name) {
  std::vector<Passage> passages;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (Trim(line).empty()) continue;
    try {
      Passage p = ParseRecord(line);
      ValidatePassage(p);
      if (!ids.insert(p.id).second) {
        throw Error(ErrorCode::kDuplicateId, "duplicate passage id '" + p.id + "'");
      }
      passages.push_back(std::move(p));
    } catch (const Error& e) {
      throw Error(e.code(), source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Corpus(std::move(passages),
                Provenance{std::move(source_name), std::chrono::system_clock::now()});
}

Corpus LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open dataset " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseCorpus(buffer.str(), path.string());
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus) {
    out += SerializeRecord(p);
    out += '\n';
  }
  return out;
}

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << SerializeCorpus(corpus);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

TrainTest SplitCorpus(const Corpus& corpus, std::uint64_t seed) {
  std::vector<Passage> train;
  std::vector<Passage> test;
  std::vector<std::size_t> untagged;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = corpus[i];
    if (!p.split) {
      untagged.push_back(i);
    } else if (*p.split == Split::kTrain) {
      train.push_back(p);
    } else {
      test.push_back(p);
    }
  }
  Rng rng(DeriveSeed(seed, StableHash("split_corpus")));
  rng.Shuffle(std::span(untagged));
  const std::size_t n_train = (untagged.size() + 1) / 2;
  for (std::size_t k = 0; k < untagged.size(); ++k) {
    (k < n_train ? train : test).push_back(corpus[untagged[k]]);
  }
  const auto& prov = corpus.provenance();
  return {Corpus(std::move(train), prov), Corpus(std::move(test), prov)};
}

std::map<int, std::size_t> FloorHistogram(const Corpus& corpus) {
  std::map<int, std::size_t> hist;
  for (const auto& p : corpus) ++hist[static_cast<int>(std::floor(p.label))];
  return hist;
}

Corpus BalancedSubsample(const Corpus& corpus, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    buckets[static_cast<int>(std::floor(corpus[i].label))].push_back(i);
  }
  if (buckets.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "cannot subsample an empty corpus");
  }
  std::string missing;
  for (int level = buckets.begin()->first; level <= buckets.rbegin()->first; ++level) {
    if (!buckets.contains(level)) {
      if (!missing.empty()) missing += ",";
      missing += std::to_string(level);
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kMissingLevels, "empty floor-level buckets: " + missing);
  }
  std::size_t target = corpus.size();
  for (const auto& [level, members] : buckets) target = std::min(target, members.size());

  std::vector<std::size_t> keep;
  for (auto& [level, members] : buckets) {
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(level)));
    rng.Shuffle(std::span(members));
    keep.insert(keep.end(), members.begin(),
                members.begin() + static_cast<std::ptrdiff_t>(target));
  }
  std::sort(keep.begin(), keep.end());
  std::vector<Passage> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(corpus[i]);
  return Corpus(std::move(out), corpus.provenance());
}

}  // namespace acecefr::corpus
