#pragma once

// End-to-end drivers wiring corpus -> retrieval -> prompts -> gateway ->
// align/relations -> predictions, plus the baseline, scoring and comparison
// commands used by the CLI.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "softmention/corpus.hpp"
#include "softmention/eval.hpp"
#include "softmention/llm.hpp"

namespace softmention::pipeline {

enum class RetrievalMode {
  RandomK,
  RandomCover,
  SimSentences,
  SimEntities,
  RelationSignature,
};

enum class ExampleOrder { BestFirst, BestLast };
enum class TransportKind { Http, MockGold };

struct RunConfig {
  int subtask = 1;
  RetrievalMode retrieval = RetrievalMode::SimSentences;
  int topn = 0;  // 0 -> mode default (sim_sentences 10, sim_entities 7, random_k 7)
  uint64_t rng_seed = 7;
  std::string chat_model = "gpt-4";
  std::string embed_model = "text-embedding-3-small";
  std::string endpoint = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string prompt_version = "v1";
  bool heuristic_fallback = true;
  bool seed_static_table = true;
  ExampleOrder example_order = ExampleOrder::BestFirst;
  TransportKind transport = TransportKind::Http;
  int concurrency = 1;
  llm::RetryPolicy retry;
  bool oracle_mentions = true;
  bool dedupe_examples_by_text = true;
  bool use_cache = true;
  std::optional<int> max_tokens;
  std::filesystem::path train;
  std::filesystem::path test;
  std::filesystem::path embeddings;          // sidecar; empty -> embed endpoint
  std::filesystem::path candidates;          // optional sentence-id filter
  std::filesystem::path predicted_mentions;  // chained-mode mention source
  std::filesystem::path cache_dir;
  std::filesystem::path out_dir;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& config);

struct RunResult {
  std::filesystem::path predictions_path;
  std::filesystem::path manifest_path;
  nlohmann::json manifest;
};

// Runs one subtask over the test split and writes predictions.jsonl plus a
// deterministic manifest.json into out_dir (wall-clock timing goes to
// run.log, not the manifest). A non-null transport overrides the configured
// one; the caller keeps ownership.
RunResult cmd_run(const RunConfig& config,
                  llm::Transport* transport_override = nullptr);

struct BaselineConfig {
  std::string rule = "heuristic";  // heuristic | necessary
  bool seed_static_table = true;
  std::filesystem::path train;
  std::filesystem::path test;
  std::filesystem::path mentions;  // optional mention source, defaults to gold
  std::filesystem::path out_dir;
};

RunResult cmd_baseline(const BaselineConfig& config);

struct ScoreOptions {
  eval::LabelChannel channel = eval::LabelChannel::TypeAndIntention;
  std::filesystem::path out_dir;  // empty -> no files written
};

eval::EvalReport cmd_score(const std::filesystem::path& gold_path,
                           const std::filesystem::path& pred_path, int subtask,
                           const ScoreOptions& options = {});

eval::ReportDelta cmd_compare(const std::filesystem::path& report_a,
                              const std::filesystem::path& report_b);

// Scripted transport that answers every prompt from the gold annotations of
// the given corpus; embedding requests get deterministic hash-derived
// vectors. This is what `--transport mock` uses.
std::unique_ptr<llm::MockTransport> make_gold_transport(
    Corpus test, int subtask, SignatureMatrix matrix,
    std::string prompt_version = "v1");

}  // namespace softmention::pipeline
