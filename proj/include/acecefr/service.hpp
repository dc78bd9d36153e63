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
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>

#include "acecefr/linear_model.hpp"

namespace acecefr::service {

struct ServiceOptions {
  std::string model_id = "linear";
  std::size_t max_batch = 256;
  // Structured request log, one JSON line per request; null disables it.
  std::ostream* log = nullptr;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

// Scores text with one immutable linear model.
//
//   POST /v1/score        {"text": ..., "model": optional id}
//   POST /v1/score:batch  {"requests": [{"text": ...}, ...]}
//   GET  /healthz
//
// The Handle* methods are the transport-independent core; Start/Listen wrap
// them in an HTTP/1.1 server.
class ScoringService {
 public:
  ScoringService(linear_model::LinearModel model, ServiceOptions options = {});
  ~ScoringService();

  ScoringService(const ScoringService&) = delete;
  ScoringService& operator=(const ScoringService&) = delete;

  HttpResponse HandleScore(std::string_view body) const;
  HttpResponse HandleBatch(std::string_view body) const;
  HttpResponse HandleHealth() const;

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  int Bind(const std::string& host, int port);
  // Serves until Stop(). Must follow a successful Bind.
  bool Listen();
  void Stop();
  bool IsRunning() const;

  const linear_model::LinearModel& model() const { return model_; }
  const std::string& model_id() const { return options_.model_id; }

 private:
  void Log(std::string_view method, std::string_view path, int status,
           long long latency_us) const;

  linear_model::LinearModel model_;
  ServiceOptions options_;
  mutable std::mutex log_mu_;
  struct Server;
  std::unique_ptr<Server> server_;
};

}  // namespace acecefr::service
