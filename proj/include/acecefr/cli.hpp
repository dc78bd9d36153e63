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

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "acecefr/error.hpp"

namespace acecefr::cli {

// Every field can come from --config (flat key = value lines named after the
// long flags); explicit flags win over the file.
struct RunConfig {
  std::string dataset;
  std::uint64_t seed = 42;
  std::string model;
  std::string output;

  // llm-eval / llm-label
  std::string transcript;
  std::string record_transcript;
  std::string endpoint;
  std::string llm_model;
  std::string credential_env = "ACECEFR_LLM_API_KEY";
  int timeout_ms = 30000;
  int max_retries = 2;
  std::size_t k = 3;
  std::size_t n_exemplars = 64;
  std::size_t parallelism = 1;
  std::size_t limit = 0;
  std::string input;

  // eval
  std::size_t resamples = 10000;

  // ensemble
  std::vector<std::string> bases;
  std::size_t n_tune = 100;

  // bench
  std::size_t n = 100;
  std::size_t warmup = 10;

  // serve
  std::string bind = "127.0.0.1:8080";
  std::string model_id = "linear";
  std::size_t max_batch = 256;
};

// 0 ok, 2 usage, 3 data error, 4 client or transport error.
int ExitCodeFor(ErrorCode code);

// Entry point behind the `acecefr` binary. Results go to `out`; the effective
// configuration and machine-readable error lines go to `err`.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace acecefr::cli
