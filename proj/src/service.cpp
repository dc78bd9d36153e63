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

#include "acecefr/service.hpp"

#include <chrono>

#include "acecefr/corpus.hpp"
#include "acecefr/error.hpp"
#include "acecefr/features.hpp"
#include "httplib.h"
#include "json.hpp"

namespace acecefr::service {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

ordered_json ErrorObject(std::string_view code, std::string_view message) {
  ordered_json e;
  e["code"] = code;
  e["message"] = message;
  ordered_json j;
  j["error"] = e;
  return j;
}

HttpResponse ErrorResponse(int status, std::string_view code, std::string_view message) {
  return {status, ErrorObject(code, message).dump()};
}

// Outcome of scoring one request object; `status` is the HTTP status the
// single-item endpoint would use.
struct ItemResult {
  int status = 200;
  ordered_json body;
};

}  // namespace

struct ScoringService::Server {
  httplib::Server http;
};

ScoringService::ScoringService(linear_model::LinearModel model, ServiceOptions options)
    : model_(model), options_(std::move(options)), server_(std::make_unique<Server>()) {
  auto& http = server_->http;
  auto timed = [this](auto handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      const auto start = Clock::now();
      HttpResponse out;
      try {
        out = handler(req);
      } catch (...) {
        out = ErrorResponse(500, "Internal", "internal error");
      }
      res.status = out.status;
      res.set_content(out.body, "application/json");
      const auto us =
          std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
      Log(req.method, req.path, out.status, us);
    };
  };
  http.set_tcp_nodelay(true);
  http.Post("/v1/score", timed([this](const httplib::Request& req) { return HandleScore(req.body); }));
  http.Post("/v1/score:batch",
            timed([this](const httplib::Request& req) { return HandleBatch(req.body); }));
  http.Get("/healthz", timed([this](const httplib::Request&) { return HandleHealth(); }));
}

ScoringService::~ScoringService() { Stop(); }

namespace {

ItemResult ScoreItem(const linear_model::LinearModel& model, const std::string& model_id,
                     const json& request) {
  const auto start = Clock::now();
  if (!request.is_object()) {
    return {400, ErrorObject("MalformedRequest", "request must be a JSON object")};
  }
  if (request.contains("model") && !request["model"].is_null()) {
    if (!request["model"].is_string() || request["model"].get<std::string>() != model_id) {
      return {404, ErrorObject("UnknownModel", "unknown model id")};
    }
  }
  if (!request.contains("text") || !request["text"].is_string()) {
    return {400, ErrorObject("EmptyText", "request needs a non-empty string 'text'")};
  }
  double score = 0;
  try {
    score = linear_model::Predict(model, request["text"].get<std::string>());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyText) {
      return {400, ErrorObject("EmptyText", "text contains no tokens")};
    }
    throw;
  }
  ordered_json body;
  body["score"] = score;
  body["cefr"] = corpus::LevelFromScore(score).name();
  body["model"] = model_id;
  body["latency_us"] =
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
  return {200, std::move(body)};
}

}  // namespace

HttpResponse ScoringService::HandleScore(std::string_view body) const {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::parse_error&) {
    return ErrorResponse(400, "MalformedRequest", "body is not valid JSON");
  }
  auto item = ScoreItem(model_, options_.model_id, request);
  return {item.status, item.body.dump()};
}

HttpResponse ScoringService::HandleBatch(std::string_view body) const {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::parse_error&) {
    return ErrorResponse(400, "MalformedRequest", "body is not valid JSON");
  }
  if (!request.is_object() || !request.contains("requests") || !request["requests"].is_array()) {
    return ErrorResponse(400, "MalformedRequest", "body needs a 'requests' array");
  }
  const auto& items = request["requests"];
  if (items.empty()) return ErrorResponse(400, "EmptyInput", "batch is empty");
  if (items.size() > options_.max_batch) {
    return ErrorResponse(413, "BatchTooLarge",
                         "batch of " + std::to_string(items.size()) + " exceeds limit of " +
                             std::to_string(options_.max_batch));
  }
  ordered_json responses = ordered_json::array();
  for (const auto& item : items) {
    responses.push_back(ScoreItem(model_, options_.model_id, item).body);
  }
  ordered_json out;
  out["responses"] = std::move(responses);
  return {200, out.dump()};
}

HttpResponse ScoringService::HandleHealth() const {
  ordered_json j;
  j["status"] = "ok";
  j["model"] = options_.model_id;
  j["schema_version"] = model_.feature_schema_version;
  return {200, j.dump()};
}

int ScoringService::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->http.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host);
    return bound;
  }
  if (!server_->http.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

bool ScoringService::Listen() { return server_->http.listen_after_bind(); }

void ScoringService::Stop() {
  if (server_) server_->http.stop();
}

bool ScoringService::IsRunning() const { return server_->http.is_running(); }

void ScoringService::Log(std::string_view method, std::string_view path, int status,
                         long long latency_us) const {
  if (options_.log == nullptr) return;
  ordered_json j;
  j["method"] = method;
  j["path"] = path;
  j["status"] = status;
  j["latency_us"] = latency_us;
  std::lock_guard lock(log_mu_);
  *options_.log << j.dump() << '\n';
  options_.log->flush();
}

}  // namespace acecefr::service
