// softmention CLI: run the extraction pipeline, the relation baselines, and
// the scorer from the command line. Everything goes through the C API.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "softmention.h"

namespace {

using nlohmann::json;

int finish(smx_status status) {
  if (status == SMX_OK) return 0;
  std::fprintf(stderr, "error: %s\n", smx_last_error());
  return status <= SMX_ERR_TRANSPORT ? static_cast<int>(status) : 1;
}

struct OwnedString {
  char* value = nullptr;
  ~OwnedString() { smx_string_free(value); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"software mention, attribute, and relation extraction pipeline"};
  app.require_subcommand(1);

  // ---- run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run one subtask over a test split");
  int subtask = 1;
  std::string train, test, out_dir, retrieval = "sim_sentences";
  std::string chat_model = "gpt-4", embed_model = "text-embedding-3-small";
  std::string endpoint = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string prompt_version = "v1", transport = "http";
  std::string example_order = "best_first";
  std::string embeddings, candidates, predicted_mentions, cache_dir;
  int topn = 0, concurrency = 1, max_retries = 3, retry_base_ms = 200;
  std::optional<int> max_tokens;
  unsigned long long rng_seed = 7;
  bool no_fallback = false, no_static_seed = false, no_cache = false;
  bool no_dedupe = false, chained_mentions = false;

  run->add_option("--subtask", subtask, "1 = software NER, 2 = attributes, 3 = relations")
      ->required()
      ->check(CLI::Range(1, 3));
  run->add_option("--train", train, "training corpus (jsonl)")->required();
  run->add_option("--test", test, "test corpus (jsonl)")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--retrieval", retrieval,
                  "random_k | random_cover | sim_sentences | sim_entities | "
                  "relation_signature");
  run->add_option("--topn", topn, "examples per prompt (0 = mode default)");
  run->add_option("--seed", rng_seed, "rng seed for random retrieval");
  run->add_option("--model", chat_model, "chat model name");
  run->add_option("--embed-model", embed_model, "embedding model name");
  run->add_option("--endpoint", endpoint, "chat-completions base URL");
  run->add_option("--api-key-env", api_key_env, "env var holding the API key");
  run->add_option("--prompt-version", prompt_version, "prompt template version");
  run->add_option("--transport", transport,
                  "http | mock (mock answers from gold annotations)");
  run->add_option("--embeddings", embeddings, "sidecar embedding file");
  run->add_option("--candidates", candidates,
                  "optional candidate sentence id list");
  run->add_option("--predicted-mentions", predicted_mentions,
                  "prediction file used as mention source (subtasks 2/3)");
  run->add_flag("--chained", chained_mentions,
                "use --predicted-mentions instead of gold oracle mentions");
  run->add_option("--cache-dir", cache_dir, "response cache directory");
  run->add_option("--concurrency", concurrency, "max in-flight requests");
  run->add_option("--retries", max_retries, "retry cap for transient failures");
  run->add_option("--retry-base-ms", retry_base_ms, "backoff base delay");
  run->add_option("--max-tokens", max_tokens, "completion token limit");
  run->add_option("--example-order", example_order, "best_first | best_last");
  run->add_flag("--no-fallback", no_fallback,
                "disable the heuristic fallback for unanswered questions");
  run->add_flag("--no-static-seed", no_static_seed,
                "mine relation signatures from training data only");
  run->add_flag("--no-cache", no_cache, "bypass the response cache");
  run->add_flag("--no-dedupe-examples", no_dedupe,
                "keep text-duplicate retrieved examples");

  // ---- baseline -------------------------------------------------------------
  auto* baseline = app.add_subcommand("baseline", "rule-based relation baselines");
  std::string rule = "heuristic", b_train, b_test, b_out, b_mentions;
  bool b_no_static_seed = false;
  baseline->add_option("--rule", rule, "heuristic | necessary");
  baseline->add_option("--train", b_train, "training corpus for signature mining");
  baseline->add_option("--test", b_test, "test corpus (jsonl)")->required();
  baseline->add_option("--out", b_out, "output directory")->required();
  baseline->add_option("--mentions", b_mentions,
                       "optional mention source (defaults to gold)");
  baseline->add_flag("--no-static-seed", b_no_static_seed,
                     "mine signatures from training data only");

  // ---- score ----------------------------------------------------------------
  auto* score = app.add_subcommand("score", "score predictions against gold");
  std::string s_gold, s_pred, s_out, channel = "type_and_intention";
  int s_subtask = 1;
  score->add_option("--gold", s_gold, "gold corpus (jsonl)")->required();
  score->add_option("--pred", s_pred, "predictions (jsonl)")->required();
  score->add_option("--subtask", s_subtask, "1 | 2 | 3")
      ->required()
      ->check(CLI::Range(1, 3));
  score->add_option("--channel", channel, "type_only | type_and_intention");
  score->add_option("--out", s_out, "directory for report.json / report.txt");

  // ---- validate ---------------------------------------------------------------
  auto* validate = app.add_subcommand("validate", "check corpus invariants");
  std::string v_corpus;
  validate->add_option("--corpus", v_corpus, "corpus file (jsonl)")->required();

  // ---- mine-signatures ------------------------------------------------------
  auto* mine = app.add_subcommand("mine-signatures",
                                  "mine admissible relation signatures");
  std::string m_train, m_out;
  bool m_no_static_seed = false;
  mine->add_option("--train", m_train, "training corpus (jsonl)")->required();
  mine->add_option("--out", m_out, "write signatures JSON here");
  mine->add_flag("--no-static-seed", m_no_static_seed,
                 "mined signatures only, no static grid");

  // ---- compare ----------------------------------------------------------------
  auto* compare = app.add_subcommand("compare", "delta between two reports");
  std::string c_a, c_b, c_out;
  compare->add_option("--a", c_a, "baseline report.json")->required();
  compare->add_option("--b", c_b, "comparison report.json")->required();
  compare->add_option("--out", c_out, "write delta JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1
  }

  if (run->parsed()) {
    json config = {
        {"subtask", subtask},
        {"retrieval", retrieval},
        {"topn", topn},
        {"rng_seed", rng_seed},
        {"chat_model", chat_model},
        {"embed_model", embed_model},
        {"endpoint", endpoint},
        {"api_key_env", api_key_env},
        {"prompt_version", prompt_version},
        {"transport", transport},
        {"heuristic_fallback", !no_fallback},
        {"seed_static_table", !no_static_seed},
        {"example_order", example_order},
        {"concurrency", concurrency},
        {"max_retries", max_retries},
        {"retry_base_ms", retry_base_ms},
        {"oracle_mentions", !chained_mentions},
        {"dedupe_examples_by_text", !no_dedupe},
        {"use_cache", !no_cache},
        {"train", train},
        {"test", test},
        {"embeddings", embeddings},
        {"candidates", candidates},
        {"predicted_mentions", predicted_mentions},
        {"cache_dir", cache_dir},
        {"out_dir", out_dir},
    };
    if (max_tokens) config["max_tokens"] = *max_tokens;
    OwnedString manifest;
    smx_status status = smx_run(config.dump().c_str(), &manifest.value);
    if (status == SMX_OK)
      std::printf("wrote %s/predictions.jsonl and %s/manifest.json\n",
                  out_dir.c_str(), out_dir.c_str());
    return finish(status);
  }

  if (baseline->parsed()) {
    json config = {{"rule", rule},
                   {"seed_static_table", !b_no_static_seed},
                   {"train", b_train},
                   {"test", b_test},
                   {"mentions", b_mentions},
                   {"out_dir", b_out}};
    OwnedString predictions;
    smx_status status = smx_baseline(config.dump().c_str(), &predictions.value);
    if (status == SMX_OK) std::printf("wrote %s\n", predictions.value);
    return finish(status);
  }

  if (score->parsed()) {
    json options = {{"channel", channel}, {"out_dir", s_out}};
    OwnedString report;
    smx_status status = smx_score(s_gold.c_str(), s_pred.c_str(), s_subtask,
                                  options.dump().c_str(), &report.value);
    if (status != SMX_OK) return finish(status);
    OwnedString table;
    status = smx_format_report(report.value, &table.value);
    if (status == SMX_OK) std::fputs(table.value, stdout);
    return finish(status);
  }

  if (validate->parsed()) {
    smx_corpus* corpus = nullptr;
    smx_status status = smx_corpus_open_lenient(v_corpus.c_str(), &corpus);
    if (status != SMX_OK) return finish(status);
    OwnedString report;
    status = smx_corpus_validate(corpus, &report.value);
    if (status != SMX_OK) {
      smx_corpus_close(corpus);
      return finish(status);
    }
    json issues = json::parse(report.value);
    if (issues.empty()) {
      std::printf("ok: %zu sentences, no violations\n",
                  smx_corpus_size(corpus));
      smx_corpus_close(corpus);
      return 0;
    }
    for (const auto& issue : issues)
      std::fprintf(stderr, "%s: %s\n",
                   issue["sentence_id"].get<std::string>().c_str(),
                   issue["message"].get<std::string>().c_str());
    std::fprintf(stderr, "%zu violation(s)\n", issues.size());
    smx_corpus_close(corpus);
    return SMX_ERR_DATA;
  }

  if (mine->parsed()) {
    smx_corpus* corpus = nullptr;
    smx_status status = smx_corpus_open(m_train.c_str(), &corpus);
    if (status != SMX_OK) return finish(status);
    smx_matrix* matrix = nullptr;
    status = smx_mine_signatures(corpus, m_no_static_seed ? 0 : 1, &matrix);
    smx_corpus_close(corpus);
    if (status != SMX_OK) return finish(status);
    OwnedString out;
    status = smx_matrix_to_json(matrix, &out.value);
    smx_matrix_free(matrix);
    if (status != SMX_OK) return finish(status);
    if (!m_out.empty()) {
      FILE* f = std::fopen(m_out.c_str(), "w");
      if (!f) {
        std::fprintf(stderr, "error: cannot write %s\n", m_out.c_str());
        return SMX_ERR_DATA;
      }
      std::fputs(out.value, f);
      std::fputc('\n', f);
      std::fclose(f);
    } else {
      std::puts(out.value);
    }
    return 0;
  }

  if (compare->parsed()) {
    OwnedString delta;
    smx_status status = smx_compare(c_a.c_str(), c_b.c_str(), &delta.value);
    if (status != SMX_OK) return finish(status);
    OwnedString table;
    status = smx_format_delta(delta.value, &table.value);
    if (status != SMX_OK) return finish(status);
    std::fputs(table.value, stdout);
    if (!c_out.empty()) {
      FILE* f = std::fopen(c_out.c_str(), "w");
      if (!f) {
        std::fprintf(stderr, "error: cannot write %s\n", c_out.c_str());
        return SMX_ERR_DATA;
      }
      std::fputs(delta.value, f);
      std::fputc('\n', f);
      std::fclose(f);
    }
    return 0;
  }

  return 0;
}
