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

#include "acecefr/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "acecefr/bench.hpp"
#include "acecefr/corpus.hpp"
#include "acecefr/ensemble.hpp"
#include "acecefr/features.hpp"
#include "acecefr/linear_model.hpp"
#include "acecefr/llm_client.hpp"
#include "acecefr/llm_rater.hpp"
#include "acecefr/metrics.hpp"
#include "acecefr/rng.hpp"
#include "acecefr/service.hpp"
#include "json.hpp"

namespace acecefr::cli {
namespace {

using nlohmann::ordered_json;

void Require(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("missing required flag ") + flag);
  }
}

corpus::Corpus LoadDataset(const RunConfig& cfg) {
  Require(cfg.dataset, "--dataset");
  return corpus::LoadCorpus(cfg.dataset);
}

int CmdStats(const RunConfig& cfg, std::ostream& out) {
  const auto data = LoadDataset(cfg);
  if (data.empty()) throw Error(ErrorCode::kEmptyCorpus, "dataset " + cfg.dataset + " is empty");
  std::vector<double> lengths;
  std::size_t single = 0;
  std::size_t longest = 0;
  for (const auto& p : data) {
    const std::size_t n = features::CountTokens(p.text);
    lengths.push_back(static_cast<double>(n));
    if (n == 1) ++single;
    longest = std::max(longest, n);
  }
  double total = 0;
  for (double v : lengths) total += v;
  ordered_json j;
  j["count"] = data.size();
  j["mean_words"] = total / static_cast<double>(lengths.size());
  j["median_words"] = metrics::Median(lengths);
  j["single_word"] = single;
  j["max_words"] = longest;
  ordered_json hist = ordered_json::object();
  for (const auto& [level, count] : corpus::FloorHistogram(data)) {
    hist[std::to_string(level)] = count;
  }
  j["floor_histogram"] = hist;
  out << j.dump() << '\n';
  return 0;
}

int CmdFeatures(const std::string& text, std::ostream& out) {
  out << features::ToJson(features::Extract(text)) << '\n';
  return 0;
}

int CmdTrain(const RunConfig& cfg, std::ostream& out) {
  const auto data = LoadDataset(cfg);
  const std::string path = cfg.output.empty() ? cfg.model : cfg.output;
  Require(path, "--output");
  const auto split = corpus::SplitCorpus(data, cfg.seed);
  const auto model = linear_model::FitCorpus(split.train, cfg.seed);
  linear_model::SaveModel(model, path);
  const auto texts = split.train.Texts();
  const auto predictions = linear_model::PredictAll(model, texts);
  ordered_json j;
  j["model_path"] = path;
  j["samples"] = model.training_meta.samples;
  j["intercept"] = model.intercept;
  j["weights"] = model.weights;
  j["train_mse"] = metrics::Mse(predictions, split.train.Labels());
  j["ridge_fallback"] = model.training_meta.ridge_fallback;
  out << j.dump() << '\n';
  return 0;
}

std::map<std::string, double> FeatureCorrelations(const corpus::Corpus& data) {
  std::vector<std::vector<double>> cols(5);
  for (const auto& p : data) {
    const auto f = features::Extract(p.text);
    cols[0].push_back(f.avg_word_len_chars);
    cols[1].push_back(f.avg_sent_len_chars);
    cols[2].push_back(f.avg_sent_len_words);
    cols[3].push_back(f.ln_sent_len_chars);
    cols[4].push_back(f.ln_sent_len_words);
  }
  static const char* kNames[] = {"avg_word_len_chars", "avg_sent_len_chars",
                                 "avg_sent_len_words", "ln_sent_len_chars", "ln_sent_len_words"};
  const auto labels = data.Labels();
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    try {
      out[kNames[i]] = metrics::Pearson(cols[i], labels);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUndefinedCorrelation && e.code() != ErrorCode::kEmptyInput) throw;
    }
  }
  return out;
}

int CmdEval(const RunConfig& cfg, std::ostream& out) {
  const auto data = LoadDataset(cfg);
  Require(cfg.model, "--model");
  const auto model = linear_model::LoadModel(cfg.model);
  const auto split = corpus::SplitCorpus(data, cfg.seed);
  if (split.test.empty()) throw Error(ErrorCode::kEmptyCorpus, "test split is empty");
  const auto texts = split.test.Texts();
  const auto predictions = linear_model::PredictAll(model, texts);
  auto report = metrics::Evaluate(predictions, split.test.Labels(), split.train.Labels(),
                                  {cfg.seed, cfg.resamples, cfg.parallelism});
  report.pearson_by_feature = FeatureCorrelations(split.test);
  if (!cfg.output.empty()) {
    ensemble::BasePredictions preds;
    for (std::size_t i = 0; i < split.test.size(); ++i) preds[split.test[i].id] = predictions[i];
    ensemble::SaveBasePredictions(preds, cfg.output);
  }
  out << report.ToJson() << '\n';
  return 0;
}

int CmdPredict(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  Require(cfg.model, "--model");
  const auto model = linear_model::LoadModel(cfg.model);
  const double score = linear_model::Predict(model, text);
  ordered_json j;
  j["score"] = score;
  j["cefr"] = corpus::LevelFromScore(score).name();
  out << j.dump() << '\n';
  return 0;
}

std::unique_ptr<llm::LlmClient> MakeClient(const RunConfig& cfg) {
  if (!cfg.transcript.empty()) {
    return std::make_unique<llm::TranscriptClient>(llm::TranscriptClient::FromFile(cfg.transcript));
  }
  if (!cfg.endpoint.empty()) {
    llm::HttpClientConfig http;
    http.endpoint = cfg.endpoint;
    http.model = cfg.llm_model;
    http.credential_env = cfg.credential_env;
    http.timeout = std::chrono::milliseconds(cfg.timeout_ms);
    http.max_retries = cfg.max_retries;
    return std::make_unique<llm::HttpClient>(http);
  }
  throw Error(ErrorCode::kInvalidArgument, "configure --transcript or --endpoint");
}

llm::RaterOptions RaterOptionsFrom(const RunConfig& cfg) {
  return {cfg.k, cfg.seed, cfg.n_exemplars, cfg.parallelism};
}

int CmdLlmEval(const RunConfig& cfg, std::ostream& out) {
  const auto data = LoadDataset(cfg);
  const auto split = corpus::SplitCorpus(data, cfg.seed);
  auto base_client = MakeClient(cfg);
  std::optional<llm::RecordingClient> recorder;
  llm::LlmClient* client = base_client.get();
  if (!cfg.record_transcript.empty()) client = &recorder.emplace(*base_client);

  const std::size_t count =
      cfg.limit == 0 ? split.test.size() : std::min(cfg.limit, split.test.size());
  if (count == 0) throw Error(ErrorCode::kEmptyCorpus, "test split is empty");
  std::vector<double> predictions;
  std::vector<double> labels;
  ensemble::BasePredictions by_id;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& p = split.test[i];
    auto options = RaterOptionsFrom(cfg);
    options.base_seed = DeriveSeed(cfg.seed, StableHash(p.id));
    const auto result = llm::Rate(p.text, split.train, *client, options);
    predictions.push_back(result.score);
    labels.push_back(p.label);
    by_id[p.id] = result.score;
  }
  if (recorder) llm::WriteTranscript(recorder->Entries(), cfg.record_transcript);
  if (!cfg.output.empty()) ensemble::SaveBasePredictions(by_id, cfg.output);
  const auto report = metrics::Evaluate(predictions, labels, split.train.Labels(),
                                        {cfg.seed, cfg.resamples, 1});
  out << report.ToJson() << '\n';
  return 0;
}

std::vector<llm::TextItem> ReadTextItems(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<llm::TextItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("text") && j["text"].is_string()) {
      std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                                : "line-" + std::to_string(line_no);
      items.push_back({std::move(id), j["text"].get<std::string>()});
    } else {
      items.push_back({"line-" + std::to_string(line_no), line});
    }
  }
  return items;
}

int CmdLlmLabel(const RunConfig& cfg, std::ostream& out) {
  Require(cfg.input, "--input");
  Require(cfg.output, "--output");
  const auto data = LoadDataset(cfg);
  const auto split = corpus::SplitCorpus(data, cfg.seed);
  auto client = MakeClient(cfg);
  llm::BatchOptions options;
  options.rater = RaterOptionsFrom(cfg);
  options.parallelism = cfg.parallelism;
  const auto summary =
      llm::BatchLabel(ReadTextItems(cfg.input), split.train, *client, options, cfg.output);
  ordered_json j;
  j["labeled"] = summary.labeled;
  j["skipped"] = summary.skipped;
  j["failed"] = summary.failed;
  j["output"] = cfg.output;
  out << j.dump() << '\n';
  return 0;
}

int CmdEnsemble(const RunConfig& cfg, std::ostream& out) {
  const auto data = LoadDataset(cfg);
  const auto split = corpus::SplitCorpus(data, cfg.seed);
  std::vector<std::string> ids;
  std::vector<ensemble::BasePredictions> bases;
  for (const auto& spec : cfg.bases) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw Error(ErrorCode::kInvalidArgument, "--base expects id=path, got '" + spec + "'");
    }
    ids.push_back(spec.substr(0, eq));
    bases.push_back(ensemble::LoadBasePredictions(spec.substr(eq + 1)));
  }
  if (!cfg.model.empty()) {
    const auto model = linear_model::LoadModel(cfg.model);
    ensemble::BasePredictions preds;
    for (const auto& p : split.test) preds[p.id] = linear_model::Predict(model, p.text);
    ids.push_back("linear");
    bases.push_back(std::move(preds));
  }
  if (bases.empty()) throw Error(ErrorCode::kInvalidArgument, "no --base or --model given");

  const auto parts = ensemble::TuneEvalSplit(split.test, cfg.n_tune, cfg.seed);
  const auto tune_x = ensemble::AlignPredictions(parts.tune, bases, ids);
  const auto eval_x = ensemble::AlignPredictions(parts.eval, bases, ids);
  const auto tune_y = parts.tune.Labels();
  const auto eval_y = parts.eval.Labels();
  const auto stack = ensemble::FitStack(tune_x, tune_y, ids);

  auto combined = [&](const linear_model::Matrix& x) {
    std::vector<double> p(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) p[i] = ensemble::PredictStack(stack, x.row(i));
    return p;
  };
  ordered_json j;
  j["tune_n"] = parts.tune.size();
  j["eval_n"] = parts.eval.size();
  ordered_json rows = ordered_json::array();
  for (std::size_t b = 0; b < ids.size(); ++b) {
    ordered_json r;
    r["id"] = ids[b];
    r["weight"] = stack.weights[b];
    r["tune_mse"] = stack.base_tuning_mse[b];
    r["eval_mse"] = metrics::Mse(eval_x.column(b), eval_y);
    rows.push_back(r);
  }
  j["bases"] = rows;
  j["intercept"] = stack.intercept;
  j["combined"] = {{"tune_mse", metrics::Mse(combined(tune_x), tune_y)},
                   {"eval_mse", metrics::Mse(combined(eval_x), eval_y)}};
  j["ridge_fallback"] = stack.ridge_fallback;
  if (!cfg.output.empty()) ensemble::SaveModel(stack, cfg.output);
  out << j.dump() << '\n';
  return 0;
}

int CmdBench(const RunConfig& cfg, std::ostream& out) {
  Require(cfg.model, "--model");
  const auto model = linear_model::LoadModel(cfg.model);
  std::vector<std::string> texts;
  if (!cfg.dataset.empty()) {
    texts = corpus::LoadCorpus(cfg.dataset).Texts();
  } else {
    texts = {"The cat is here.", "I have lived here since I was 4.", "hobby",
             "He feigned indifference.",
             "Get off your high horse and lend me a hand. This house isn't going to paint "
             "itself."};
  }
  if (texts.empty()) throw Error(ErrorCode::kEmptyCorpus, "no texts to benchmark");
  out << bench::BenchLinear(model, texts, cfg.n, cfg.warmup).ToJson() << '\n';
  return 0;
}

std::atomic<bool> g_stop_requested{false};

extern "C" void HandleStopSignal(int) { g_stop_requested = true; }

int CmdServe(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Require(cfg.model, "--model");
  const auto colon = cfg.bind.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "--bind expects host:port");
  }
  const std::string host = cfg.bind.substr(0, colon);
  const int port = std::stoi(cfg.bind.substr(colon + 1));
  service::ServiceOptions options;
  options.model_id = cfg.model_id;
  options.max_batch = cfg.max_batch;
  options.log = &err;
  service::ScoringService server(linear_model::LoadModel(cfg.model), options);
  const int bound = server.Bind(host, port);
  out << ordered_json{{"listening", host + ":" + std::to_string(bound)}}.dump() << '\n';
  out.flush();

  g_stop_requested = false;
  std::signal(SIGINT, HandleStopSignal);
  std::signal(SIGTERM, HandleStopSignal);
  std::jthread watcher([&server](std::stop_token stop) {
    while (!stop.stop_requested() && !g_stop_requested) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    server.Stop();
  });
  server.Listen();
  watcher.request_stop();
  return 0;
}

void ReportError(std::ostream& err, std::string_view code, std::string_view message) {
  ordered_json j;
  j["error"] = code;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return 2;
    case ErrorCode::kTransport:
    case ErrorCode::kTranscriptMiss:
    case ErrorCode::kAllRunsFailed:
    case ErrorCode::kUnparseableCompletion:
      return 4;
    default:
      return 3;
  }
}

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"CEFR difficulty toolkit for short conversational English", "acecefr"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value file mirroring the long flags");

  app.add_option("--dataset", cfg.dataset, "Newline-delimited passage records");
  app.add_option("--seed", cfg.seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--model", cfg.model, "Linear model file")->envname("ACECEFR_MODEL");
  app.add_option("--output", cfg.output, "Output path (model, predictions or labels)");
  app.add_option("--transcript", cfg.transcript, "Replay completions from a transcript file");
  app.add_option("--record-transcript", cfg.record_transcript, "Write a transcript of live calls");
  app.add_option("--endpoint", cfg.endpoint, "HTTP completion endpoint URL");
  app.add_option("--llm-model", cfg.llm_model, "Model name sent to the endpoint");
  app.add_option("--credential-env", cfg.credential_env, "Env var holding the API credential")
      ->capture_default_str();
  app.add_option("--timeout-ms", cfg.timeout_ms)->capture_default_str();
  app.add_option("--max-retries", cfg.max_retries)->capture_default_str();
  app.add_option("--k", cfg.k, "LLM runs averaged per text")->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--n-exemplars", cfg.n_exemplars, "Few-shot exemplars per prompt (0 = zero-shot)")
      ->capture_default_str();
  app.add_option("--parallelism", cfg.parallelism)->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--limit", cfg.limit, "Rate only the first N test passages (0 = all)");
  app.add_option("--input", cfg.input, "Texts to label: JSON {id,text} or plain lines");
  app.add_option("--resamples", cfg.resamples, "Bootstrap resamples")->capture_default_str();
  app.add_option("--base", cfg.bases, "Base predictions as id=path (repeatable)");
  app.add_option("--n-tune", cfg.n_tune, "Tuning examples split from the test set")
      ->capture_default_str();
  app.add_option("--n", cfg.n, "Timed lookups")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--warmup", cfg.warmup)->capture_default_str();
  app.add_option("--bind", cfg.bind, "host:port")->capture_default_str()->envname("ACECEFR_BIND");
  app.add_option("--model-id", cfg.model_id)->capture_default_str();
  app.add_option("--max-batch", cfg.max_batch)->capture_default_str();

  std::string text;
  auto* stats = app.add_subcommand("stats", "Summarize a dataset");
  auto* feats = app.add_subcommand("features", "Print the surface features of a text");
  feats->add_option("text", text)->required();
  auto* train = app.add_subcommand("train", "Fit the linear model on the train split");
  auto* eval = app.add_subcommand("eval", "Evaluate a linear model on the test split");
  auto* predict = app.add_subcommand("predict", "Score one text");
  predict->add_option("text", text)->required();
  auto* llm_eval = app.add_subcommand("llm-eval", "Rate the test split with an LLM client");
  auto* llm_label = app.add_subcommand("llm-label", "Label texts with an LLM client (resumable)");
  auto* ens = app.add_subcommand("ensemble", "Fit and evaluate a stacked ensemble");
  auto* bench_cmd = app.add_subcommand("bench", "Single-lookup latency of the linear model");
  auto* serve = app.add_subcommand("serve", "Run the HTTP scoring service");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    ReportError(err, "Usage", e.what());
    return 2;
  }

  err << "# effective config\n" << app.config_to_str(true, false);

  try {
    if (stats->parsed()) return CmdStats(cfg, out);
    if (feats->parsed()) return CmdFeatures(text, out);
    if (train->parsed()) return CmdTrain(cfg, out);
    if (eval->parsed()) return CmdEval(cfg, out);
    if (predict->parsed()) return CmdPredict(cfg, text, out);
    if (llm_eval->parsed()) return CmdLlmEval(cfg, out);
    if (llm_label->parsed()) return CmdLlmLabel(cfg, out);
    if (ens->parsed()) return CmdEnsemble(cfg, out);
    if (bench_cmd->parsed()) return CmdBench(cfg, out);
    if (serve->parsed()) return CmdServe(cfg, out, err);
  } catch (const Error& e) {
    ReportError(err, e.name(), e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    ReportError(err, "Internal", e.what());
    return 3;
  }
  return 2;
}

}  // namespace acecefr::cli
