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

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

namespace acecefr::llm {

// A text-completion backend. Implementations must be safe to call from
// several threads at once.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Throws Error(kTransport) on backend failures.
  virtual std::string Complete(const std::string& prompt) = 0;
};

std::string Sha256Hex(std::string_view data);

// Replays canned completions keyed by the SHA-256 of the prompt. The file is
// newline-delimited {"prompt_sha256": ..., "completion": ...} records.
class TranscriptClient : public LlmClient {
 public:
  explicit TranscriptClient(std::map<std::string, std::string> by_hash)
      : by_hash_(std::move(by_hash)) {}
  static TranscriptClient FromFile(const std::filesystem::path& path);

  // Throws Error(kTranscriptMiss) for a prompt with no recorded completion.
  std::string Complete(const std::string& prompt) override;

  std::size_t size() const { return by_hash_.size(); }

 private:
  std::map<std::string, std::string> by_hash_;
};

void WriteTranscript(const std::map<std::string, std::string>& by_hash,
                     const std::filesystem::path& path);

// Forwards to another client and keeps every exchange, so live runs can be
// replayed later through a TranscriptClient.
class RecordingClient : public LlmClient {
 public:
  explicit RecordingClient(LlmClient& inner) : inner_(inner) {}
  std::string Complete(const std::string& prompt) override;
  std::map<std::string, std::string> Entries() const;

 private:
  LlmClient& inner_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> entries_;
};

class FunctionClient : public LlmClient {
 public:
  explicit FunctionClient(std::function<std::string(const std::string&)> fn)
      : fn_(std::move(fn)) {}
  std::string Complete(const std::string& prompt) override { return fn_(prompt); }

 private:
  std::function<std::string(const std::string&)> fn_;
};

struct HttpClientConfig {
  // Full URL of the completion endpoint, e.g. http://127.0.0.1:8080/v1/complete
  std::string endpoint;
  std::string model;
  // Name of the environment variable holding the bearer token. The value is
  // read at request time and never logged.
  std::string credential_env = "ACECEFR_LLM_API_KEY";
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  int max_tokens = 16;
};

// Minimal completion exchange: POST {model, prompt, max_tokens} -> {text}.
class HttpClient : public LlmClient {
 public:
  explicit HttpClient(HttpClientConfig config);
  std::string Complete(const std::string& prompt) override;

 private:
  HttpClientConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace acecefr::llm
