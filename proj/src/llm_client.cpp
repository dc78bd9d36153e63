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

#include "acecefr/llm_client.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "acecefr/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace acecefr::llm {

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

TranscriptClient TranscriptClient::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open transcript " + path.string());
  std::map<std::string, std::string> by_hash;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      by_hash[j.at("prompt_sha256").get<std::string>()] = j.at("completion").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, path.string() + ":" + std::to_string(line_no) +
                                                   ": bad transcript record: " + e.what());
    }
  }
  return TranscriptClient(std::move(by_hash));
}

std::string TranscriptClient::Complete(const std::string& prompt) {
  const std::string hash = Sha256Hex(prompt);
  const auto it = by_hash_.find(hash);
  if (it == by_hash_.end()) {
    throw Error(ErrorCode::kTranscriptMiss, "no transcript entry for prompt " + hash);
  }
  return it->second;
}

void WriteTranscript(const std::map<std::string, std::string>& by_hash,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write transcript " + path.string());
  for (const auto& [hash, completion] : by_hash) {
    nlohmann::ordered_json j;
    j["prompt_sha256"] = hash;
    j["completion"] = completion;
    out << j.dump() << '\n';
  }
}

std::string RecordingClient::Complete(const std::string& prompt) {
  std::string completion = inner_.Complete(prompt);
  std::lock_guard lock(mu_);
  entries_[Sha256Hex(prompt)] = completion;
  return completion;
}

std::map<std::string, std::string> RecordingClient::Entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

HttpClient::HttpClient(HttpClientConfig config) : config_(std::move(config)) {
  const auto& url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint must be an absolute http(s) URL");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

std::string HttpClient::Complete(const std::string& prompt) {
  httplib::Client client(scheme_host_port_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  client.set_tcp_nodelay(true);

  httplib::Headers headers;
  if (!config_.credential_env.empty()) {
    if (const char* key = std::getenv(config_.credential_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const nlohmann::json body = {
      {"model", config_.model}, {"prompt", prompt}, {"max_tokens", config_.max_tokens}};
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kTransport, "completion endpoint returned HTTP " +
                                             std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body).at("text").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kTransport, "completion response lacks a string 'text'");
    }
  }
  throw Error(ErrorCode::kTransport, "completion request failed after " +
                                         std::to_string(config_.max_retries + 1) +
                                         " attempts (" + last_error + ")");
}

}  // namespace acecefr::llm
