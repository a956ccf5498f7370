#include "softmention/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <regex>
#include <set>
#include <thread>

#include "softmention/align.hpp"
#include "softmention/digest.hpp"
#include "softmention/error.hpp"
#include "softmention/prompts.hpp"
#include "softmention/relations.hpp"
#include "softmention/retrieval.hpp"
#include "softmention/rng.hpp"

namespace softmention::pipeline {

namespace {

using nlohmann::json;

std::string retrieval_name(RetrievalMode mode) {
  switch (mode) {
    case RetrievalMode::RandomK: return "random_k";
    case RetrievalMode::RandomCover: return "random_cover";
    case RetrievalMode::SimSentences: return "sim_sentences";
    case RetrievalMode::SimEntities: return "sim_entities";
    case RetrievalMode::RelationSignature: return "relation_signature";
  }
  return "?";
}

RetrievalMode retrieval_from_name(const std::string& name) {
  if (name == "random_k") return RetrievalMode::RandomK;
  if (name == "random_cover") return RetrievalMode::RandomCover;
  if (name == "sim_sentences") return RetrievalMode::SimSentences;
  if (name == "sim_entities") return RetrievalMode::SimEntities;
  if (name == "relation_signature") return RetrievalMode::RelationSignature;
  raise(ErrorKind::Config, "unknown retrieval mode '" + name + "'");
}

int default_topn(RetrievalMode mode) {
  switch (mode) {
    case RetrievalMode::SimSentences: return 10;
    case RetrievalMode::SimEntities: return 7;
    case RetrievalMode::RandomK: return 7;
    default: return 0;
  }
}

std::string extract_last_quoted_block(const std::string& prompt) {
  const std::string delim = "\"\"\"";
  size_t last_close = prompt.rfind(delim);
  if (last_close == std::string::npos)
    raise(ErrorKind::Internal, "gold transport: no quoted block in prompt");
  size_t open = prompt.rfind(delim, last_close - 1);
  if (open == std::string::npos)
    raise(ErrorKind::Internal, "gold transport: unbalanced quoted block");
  size_t start = open + delim.size();
  return prompt.substr(start, last_close - start);
}

std::vector<Mention> sorted_by_span(std::vector<Mention> mentions) {
  std::stable_sort(mentions.begin(), mentions.end(),
                   [](const Mention& a, const Mention& b) {
                     return a.span < b.span;
                   });
  return mentions;
}

std::vector<double> hash_vector(const std::string& text, size_t dims = 8) {
  std::mt19937_64 engine(fnv1a64(text));
  std::vector<double> v(dims);
  bool nonzero = false;
  for (double& x : v) {
    x = 2.0 * (static_cast<double>(engine()) /
               static_cast<double>(UINT64_MAX)) -
        1.0;
    if (x != 0.0) nonzero = true;
  }
  if (!nonzero) v[0] = 1.0;
  return v;
}

struct SentenceOutcome {
  AnnotatedSentence prediction;
  json manifest_entry;
};

std::set<std::string> read_id_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    raise(ErrorKind::Data, "cannot open candidate list " + path.string());
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (!line.empty()) ids.insert(line);
  }
  return ids;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path);
  if (!out) raise(ErrorKind::Data, "cannot write " + path.string());
  out << content;
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.subtask = j.value("subtask", c.subtask);
  if (j.contains("retrieval"))
    c.retrieval = retrieval_from_name(j.at("retrieval").get<std::string>());
  c.topn = j.value("topn", c.topn);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.chat_model = j.value("chat_model", c.chat_model);
  c.embed_model = j.value("embed_model", c.embed_model);
  c.endpoint = j.value("endpoint", c.endpoint);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.prompt_version = j.value("prompt_version", c.prompt_version);
  c.heuristic_fallback = j.value("heuristic_fallback", c.heuristic_fallback);
  c.seed_static_table = j.value("seed_static_table", c.seed_static_table);
  if (j.contains("example_order")) {
    std::string order = j.at("example_order").get<std::string>();
    if (order == "best_first") {
      c.example_order = ExampleOrder::BestFirst;
    } else if (order == "best_last") {
      c.example_order = ExampleOrder::BestLast;
    } else {
      raise(ErrorKind::Config, "unknown example_order '" + order + "'");
    }
  }
  if (j.contains("transport")) {
    std::string transport = j.at("transport").get<std::string>();
    if (transport == "http") {
      c.transport = TransportKind::Http;
    } else if (transport == "mock") {
      c.transport = TransportKind::MockGold;
    } else {
      raise(ErrorKind::Config, "unknown transport '" + transport + "'");
    }
  }
  c.concurrency = j.value("concurrency", c.concurrency);
  c.retry.max_retries = j.value("max_retries", c.retry.max_retries);
  c.retry.base_delay_ms = j.value("retry_base_ms", c.retry.base_delay_ms);
  c.oracle_mentions = j.value("oracle_mentions", c.oracle_mentions);
  c.dedupe_examples_by_text =
      j.value("dedupe_examples_by_text", c.dedupe_examples_by_text);
  c.use_cache = j.value("use_cache", c.use_cache);
  if (j.contains("max_tokens") && !j.at("max_tokens").is_null())
    c.max_tokens = j.at("max_tokens").get<int>();
  c.train = j.value("train", std::string());
  c.test = j.value("test", std::string());
  c.embeddings = j.value("embeddings", std::string());
  c.candidates = j.value("candidates", std::string());
  c.predicted_mentions = j.value("predicted_mentions", std::string());
  c.cache_dir = j.value("cache_dir", std::string());
  c.out_dir = j.value("out_dir", std::string());
  return c;
}

json run_config_to_json(const RunConfig& c) {
  json j;
  j["subtask"] = c.subtask;
  j["retrieval"] = retrieval_name(c.retrieval);
  j["topn"] = c.topn > 0 ? c.topn : default_topn(c.retrieval);
  j["rng_seed"] = c.rng_seed;
  j["chat_model"] = c.chat_model;
  j["embed_model"] = c.embed_model;
  j["endpoint"] = c.endpoint;
  j["api_key_env"] = c.api_key_env;
  j["prompt_version"] = c.prompt_version;
  j["heuristic_fallback"] = c.heuristic_fallback;
  j["seed_static_table"] = c.seed_static_table;
  j["example_order"] =
      c.example_order == ExampleOrder::BestFirst ? "best_first" : "best_last";
  j["transport"] = c.transport == TransportKind::Http ? "http" : "mock";
  j["concurrency"] = c.concurrency;
  j["max_retries"] = c.retry.max_retries;
  j["retry_base_ms"] = c.retry.base_delay_ms;
  j["oracle_mentions"] = c.oracle_mentions;
  j["dedupe_examples_by_text"] = c.dedupe_examples_by_text;
  j["use_cache"] = c.use_cache;
  j["max_tokens"] = c.max_tokens ? json(*c.max_tokens) : json(nullptr);
  j["train"] = c.train.string();
  j["test"] = c.test.string();
  j["embeddings"] = c.embeddings.string();
  j["candidates"] = c.candidates.string();
  j["predicted_mentions"] = c.predicted_mentions.string();
  j["cache_dir"] = c.cache_dir.string();
  j["out_dir"] = c.out_dir.string();
  return j;
}

std::unique_ptr<llm::MockTransport> make_gold_transport(
    Corpus test, int subtask, SignatureMatrix matrix,
    std::string prompt_version) {
  auto corpus = std::make_shared<Corpus>(std::move(test));
  auto shared_matrix = std::make_shared<SignatureMatrix>(std::move(matrix));
  auto handler = [corpus, shared_matrix, subtask, prompt_version](
                     const std::string& path,
                     const std::string& body) -> llm::TransportReply {
    json request = json::parse(body);
    if (path == "/embeddings") {
      std::vector<std::vector<double>> vectors;
      for (const auto& text : request.at("input"))
        vectors.push_back(hash_vector(text.get<std::string>()));
      return {200, llm::make_embeddings_body(vectors)};
    }
    std::string prompt = request.at("messages").at(0).at("content");
    std::string text = extract_last_quoted_block(prompt);
    const AnnotatedSentence* sentence = nullptr;
    for (const AnnotatedSentence& s : *corpus) {
      if (s.text == text) {
        sentence = &s;
        break;
      }
    }
    if (!sentence)
      raise(ErrorKind::Internal,
            "gold transport: prompt asks about an unknown sentence: " + text);

    std::string content;
    if (subtask == 1) {
      content =
          prompts::render_entities_with_intention(sorted_by_span(sentence->software));
    } else if (subtask == 2) {
      content = prompts::render_plain_mentions(sorted_by_span(sentence->attributes));
    } else {
      auto questions = relations::enumerate_claims(*sentence, *shared_matrix);
      size_t total_claims = 0;
      for (const auto& q : questions) total_claims += q.claims.size();
      // Pull the claim indices the prompt actually used for the test block.
      size_t tail_start = prompt.rfind("### Question(s):");
      if (tail_start == std::string::npos)
        raise(ErrorKind::Internal, "gold transport: no question section");
      std::string tail = prompt.substr(tail_start);
      static const std::regex idx_re(R"(idx_(\d+):)");
      std::vector<size_t> indices;
      for (auto it = std::sregex_iterator(tail.begin(), tail.end(), idx_re);
           it != std::sregex_iterator(); ++it)
        indices.push_back(std::stoul((*it)[1].str()));
      if (indices.size() != total_claims)
        raise(ErrorKind::Internal,
              "gold transport: question section does not match gold claims");
      auto answers = relations::gold_answers(*sentence, questions);
      size_t k = 0;
      for (const auto& row : answers) {
        for (bool value : row) {
          content += "idx_" + std::to_string(indices[k]) + ": " +
                     (value ? "True" : "False") + "\n";
          ++k;
        }
      }
      if (!content.empty() && content.back() == '\n') content.pop_back();
    }
    llm::Usage usage;
    usage.prompt_tokens = static_cast<long>(prompt.size() / 4);
    usage.completion_tokens = static_cast<long>(content.size() / 4);
    return {200, llm::make_chat_completion_body(content, usage)};
  };
  return std::make_unique<llm::MockTransport>(handler);
}

namespace {

struct RunContext {
  explicit RunContext(const RunConfig& c) : config(c) {}

  const RunConfig& config;
  int topn = 0;
  Corpus train;
  Corpus test;                     // full test split
  std::vector<size_t> selected;    // indices into test after candidate filter
  std::map<std::string, const AnnotatedSentence*> mention_source;
  SignatureMatrix matrix;
  retrieval::EmbeddingStore store;
  retrieval::SentenceIndex sentence_index;
  std::vector<retrieval::EntityKey> entity_index;
  llm::ChatClient* client = nullptr;
};

bool needs_vectors(RetrievalMode mode) {
  return mode == RetrievalMode::SimSentences ||
         mode == RetrievalMode::SimEntities ||
         mode == RetrievalMode::RelationSignature;
}

// Mention lists the pipeline treats as given inputs for subtasks 2 and 3.
const AnnotatedSentence* source_for(const RunContext& ctx,
                                    const AnnotatedSentence& s) {
  auto it = ctx.mention_source.find(s.id);
  return it == ctx.mention_source.end() ? nullptr : it->second;
}

std::vector<const AnnotatedSentence*> select_examples(
    const RunContext& ctx, const AnnotatedSentence& s,
    const std::vector<relations::Question>& questions) {
  const RunConfig& config = ctx.config;
  std::vector<const AnnotatedSentence*> examples;
  switch (config.retrieval) {
    case RetrievalMode::RandomK:
      examples = retrieval::random_coverage_examples(
          ctx.train, retrieval::RandomMode::FixedK, ctx.topn,
          config.rng_seed ^ fnv1a64(s.id));
      break;
    case RetrievalMode::RandomCover:
      examples = retrieval::random_coverage_examples(
          ctx.train, retrieval::RandomMode::CoverAllLabels, 0,
          config.rng_seed ^ fnv1a64(s.id));
      break;
    case RetrievalMode::SimSentences: {
      auto scored = retrieval::top_k_sentences(ctx.sentence_index,
                                               ctx.store.get(s.id), ctx.topn);
      for (const auto& sc : scored) examples.push_back(sc.sentence);
      break;
    }
    case RetrievalMode::SimEntities: {
      const AnnotatedSentence* src = source_for(ctx, s);
      std::vector<retrieval::EntityKey> candidates;
      if (src) {
        for (size_t i = 0; i < src->software.size(); ++i) {
          candidates.push_back(
              {src->software[i].surface, src->software[i].label, s.id,
               ctx.store.get(retrieval::EmbeddingStore::entity_key(s.id, i)),
               nullptr});
        }
      }
      if (candidates.empty()) break;  // zero-shot for candidate-less sentences
      auto scored =
          retrieval::top_k_per_entity(ctx.entity_index, candidates, ctx.topn);
      for (const auto& sc : scored) examples.push_back(sc.sentence);
      break;
    }
    case RetrievalMode::RelationSignature: {
      std::vector<Signature> signatures;
      for (const auto& q : questions) {
        for (const auto& c : q.claims) {
          Signature sig{c.subject.mention.label, c.relation,
                        c.object.mention.label};
          if (std::find(signatures.begin(), signatures.end(), sig) ==
              signatures.end())
            signatures.push_back(sig);
        }
      }
      const retrieval::Vector& query = ctx.store.get(s.id);
      std::map<std::string, retrieval::Scored> best;
      for (const Signature& sig : signatures) {
        auto hit =
            retrieval::retrieve_relation_example(sig, ctx.train, ctx.store, query);
        if (!hit) continue;
        auto it = best.find(hit->sentence->id);
        if (it == best.end() || hit->similarity > it->second.similarity)
          best[hit->sentence->id] = *hit;
      }
      std::vector<std::pair<std::string, retrieval::Scored>> ordered(
          best.begin(), best.end());
      std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second.similarity != b.second.similarity)
          return a.second.similarity > b.second.similarity;
        return a.first < b.first;
      });
      for (const auto& [id, sc] : ordered) examples.push_back(sc.sentence);
      break;
    }
  }

  if (ctx.config.dedupe_examples_by_text) {
    std::set<std::string> seen;
    std::vector<const AnnotatedSentence*> unique;
    for (const AnnotatedSentence* e : examples) {
      if (seen.insert(e->text).second) unique.push_back(e);
    }
    examples = std::move(unique);
  }
  if (config.example_order == ExampleOrder::BestLast)
    std::reverse(examples.begin(), examples.end());
  return examples;
}

SentenceOutcome process_sentence(const RunContext& ctx,
                                 const AnnotatedSentence& s) {
  const RunConfig& config = ctx.config;
  AnnotatedSentence prediction;
  prediction.id = s.id;
  prediction.doc_id = s.doc_id;
  prediction.text = s.text;

  json entry;
  entry["id"] = s.id;
  bool parse_ok = true;

  std::vector<relations::Question> questions;
  const AnnotatedSentence* src = source_for(ctx, s);
  if (config.subtask == 3) {
    if (src) questions = relations::enumerate_claims(*src, ctx.matrix);
  }

  std::vector<const AnnotatedSentence*> examples =
      select_examples(ctx, s, questions);
  json example_ids = json::array();
  for (const AnnotatedSentence* e : examples) example_ids.push_back(e->id);
  entry["example_ids"] = example_ids;
  entry["fewshot"] = examples.size();

  auto run_chat = [&](const std::string& prompt) -> llm::ChatResponse {
    llm::ChatRequest request;
    request.model = config.chat_model;
    request.temperature = 0.0;  // pinned in pipeline mode
    request.max_tokens = config.max_tokens;
    request.messages = {{"user", prompt}};
    return ctx.client->complete(request);
  };

  if (config.subtask == 1) {
    prompts::PromptText prompt =
        prompts::build_ner_prompt(s.text, examples, config.prompt_version);
    entry["prompt_sha256"] = sha256_hex(prompt.text);
    llm::ChatResponse response = run_chat(prompt.text);
    entry["response_sha256"] = sha256_hex(response.content);
    entry["usage"] = {{"prompt_tokens", response.usage.prompt_tokens},
                      {"completion_tokens", response.usage.completion_tokens}};
    std::vector<align::GeneratedMention> items;
    try {
      auto parsed = prompts::parse_ner_response(
          response.content, prompts::NerParseMode::EntitiesWithIntention);
      items = std::move(parsed.items);
      entry["rejected_items"] = parsed.rejected.size();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Parse) throw;
      parse_ok = false;
    }
    auto aligned = align::locate_mentions(s.text, items);
    prediction.software = aligned.mentions();
    entry["unmatched"] = aligned.unmatched.size();
  } else if (config.subtask == 2) {
    std::vector<Mention> known = src ? src->software : std::vector<Mention>{};
    prompts::PromptText prompt = prompts::build_attr_prompt(
        s.text, known, examples, config.prompt_version);
    entry["prompt_sha256"] = sha256_hex(prompt.text);
    llm::ChatResponse response = run_chat(prompt.text);
    entry["response_sha256"] = sha256_hex(response.content);
    entry["usage"] = {{"prompt_tokens", response.usage.prompt_tokens},
                      {"completion_tokens", response.usage.completion_tokens}};
    std::vector<align::GeneratedMention> items;
    try {
      auto parsed = prompts::parse_ner_response(
          response.content, prompts::NerParseMode::Attributes);
      items = std::move(parsed.items);
      entry["rejected_items"] = parsed.rejected.size();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Parse) throw;
      parse_ok = false;
    }
    auto aligned = align::locate_mentions(s.text, items);
    prediction.software = known;
    prediction.attributes = aligned.mentions();
    entry["unmatched"] = aligned.unmatched.size();
  } else {
    prediction.software = src ? src->software : std::vector<Mention>{};
    prediction.attributes = src ? src->attributes : std::vector<Mention>{};
    entry["questions"] = questions.size();
    if (questions.empty()) {
      entry["prompt_sha256"] = nullptr;
      entry["usage"] = {{"prompt_tokens", 0}, {"completion_tokens", 0}};
    } else {
      std::vector<prompts::ScqaFewshot> blocks;
      for (const AnnotatedSentence* e : examples) {
        prompts::ScqaFewshot block;
        block.sentence = e;
        block.questions = relations::enumerate_claims(*e, ctx.matrix);
        if (block.questions.empty()) continue;  // nothing to demonstrate
        block.answers = relations::gold_answers(*e, block.questions);
        blocks.push_back(std::move(block));
      }
      entry["fewshot"] = blocks.size();
      prompts::ScqaPrompt scqa = prompts::build_scqa_prompt(
          s.text, questions, blocks, config.prompt_version);
      entry["prompt_sha256"] = sha256_hex(scqa.prompt.text);
      llm::ChatResponse response = run_chat(scqa.prompt.text);
      entry["response_sha256"] = sha256_hex(response.content);
      entry["usage"] = {{"prompt_tokens", response.usage.prompt_tokens},
                        {"completion_tokens", response.usage.completion_tokens}};
      prompts::ParsedScQaResponse parsed;
      try {
        parsed = prompts::parse_scqa_response(response.content,
                                              scqa.expected_indices);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Parse) throw;
        parse_ok = false;
      }
      std::vector<relations::AnsweredQuestion> answered;
      for (size_t qi = 0; qi < questions.size(); ++qi) {
        relations::AnsweredQuestion aq;
        aq.question = questions[qi];
        for (size_t ci = 0; ci < questions[qi].claims.size(); ++ci) {
          size_t index = scqa.test_claim_indices[qi][ci];
          auto it = parsed.answers.find(index);
          aq.answers.push_back(it == parsed.answers.end()
                                   ? std::optional<bool>()
                                   : std::optional<bool>(it->second));
        }
        answered.push_back(std::move(aq));
      }
      prediction.relations = relations::decide_relations(
          *src, answered, config.heuristic_fallback, ctx.matrix);
    }
  }

  entry["parse_ok"] = parse_ok;
  return {std::move(prediction), std::move(entry)};
}

}  // namespace

RunResult cmd_run(const RunConfig& config, llm::Transport* transport_override) {
  if (config.subtask < 1 || config.subtask > 3)
    raise(ErrorKind::Config, "subtask must be 1, 2 or 3");
  if (config.concurrency < 1)
    raise(ErrorKind::Config, "concurrency must be >= 1");
  if (config.retrieval == RetrievalMode::RelationSignature &&
      config.subtask != 3)
    raise(ErrorKind::Config,
          "relation_signature retrieval applies to subtask 3 only");
  if (config.train.empty() || config.test.empty() || config.out_dir.empty())
    raise(ErrorKind::Config, "train, test and out_dir are required");

  RunContext ctx(config);
  ctx.topn = config.topn > 0 ? config.topn : default_topn(config.retrieval);
  ctx.train = load_corpus(config.train);
  ctx.test = load_corpus(config.test);

  // Candidate sentence filter (optional id list).
  if (!config.candidates.empty()) {
    std::set<std::string> wanted = read_id_list(config.candidates);
    for (size_t i = 0; i < ctx.test.size(); ++i) {
      if (wanted.count(ctx.test[i].id)) ctx.selected.push_back(i);
    }
  } else {
    ctx.selected.resize(ctx.test.size());
    for (size_t i = 0; i < ctx.test.size(); ++i) ctx.selected[i] = i;
  }

  // Mention source for subtasks 2/3: gold oracle or a prior prediction file.
  Corpus predicted;
  if (config.subtask >= 2) {
    if (config.oracle_mentions) {
      for (const AnnotatedSentence& s : ctx.test) ctx.mention_source[s.id] = &s;
    } else {
      if (config.predicted_mentions.empty())
        raise(ErrorKind::Config,
              "oracle_mentions=false requires predicted_mentions");
      predicted = load_corpus(config.predicted_mentions);
      for (const AnnotatedSentence& s : predicted)
        ctx.mention_source[s.id] = &s;
    }
  }

  if (config.subtask == 3)
    ctx.matrix = mine_signatures(ctx.train, config.seed_static_table);

  std::unique_ptr<llm::Transport> owned_transport;
  llm::Transport* transport = transport_override;
  if (!transport) {
    if (config.transport == TransportKind::MockGold) {
      owned_transport = make_gold_transport(ctx.test, config.subtask,
                                            ctx.matrix, config.prompt_version);
    } else {
      const char* key = std::getenv(config.api_key_env.c_str());
      owned_transport =
          llm::make_http_transport(config.endpoint, key ? key : "");
    }
    transport = owned_transport.get();
  }

  std::optional<llm::ResponseCache> cache;
  if (config.use_cache && !config.cache_dir.empty())
    cache.emplace(config.cache_dir);
  llm::ChatClient client(*transport, cache ? &*cache : nullptr, config.retry);
  ctx.client = &client;

  if (needs_vectors(config.retrieval)) {
    if (!config.embeddings.empty()) {
      ctx.store = retrieval::EmbeddingStore::load(config.embeddings);
    } else {
      // No sidecar: fetch vectors from the embeddings endpoint.
      std::vector<std::string> keys;
      std::vector<std::string> texts;
      for (const Corpus* corpus : {&ctx.train, &ctx.test}) {
        for (const AnnotatedSentence& s : *corpus) {
          keys.push_back(s.id);
          texts.push_back(s.text);
        }
      }
      if (config.retrieval == RetrievalMode::SimEntities) {
        for (const Corpus* corpus : {&ctx.train, &ctx.test}) {
          for (const AnnotatedSentence& s : *corpus) {
            for (size_t i = 0; i < s.software.size(); ++i) {
              keys.push_back(retrieval::EmbeddingStore::entity_key(s.id, i));
              texts.push_back(s.software[i].surface);
            }
          }
        }
      }
      auto vectors = client.embed(texts, config.embed_model);
      for (size_t i = 0; i < keys.size(); ++i)
        ctx.store.put(keys[i], std::move(vectors[i]));
    }
    if (config.retrieval == RetrievalMode::SimSentences)
      ctx.sentence_index = retrieval::build_sentence_index(ctx.train, ctx.store);
    if (config.retrieval == RetrievalMode::SimEntities)
      ctx.entity_index = retrieval::build_entity_index(ctx.train, ctx.store);
  }

  auto started = std::chrono::steady_clock::now();

  std::vector<SentenceOutcome> outcomes(ctx.selected.size());
  size_t workers = std::min<size_t>(config.concurrency, ctx.selected.size());
  if (workers <= 1) {
    for (size_t i = 0; i < ctx.selected.size(); ++i)
      outcomes[i] = process_sentence(ctx, ctx.test[ctx.selected[i]]);
  } else {
    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    size_t first_error_index = SIZE_MAX;
    auto work = [&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= ctx.selected.size()) return;
        try {
          outcomes[i] = process_sentence(ctx, ctx.test[ctx.selected[i]]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (i < first_error_index) {
            first_error_index = i;
            first_error = std::current_exception();
          }
        }
      }
    };
    std::vector<std::thread> threads;
    for (size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started)
                     .count();

  // Output order is by sentence id, independent of completion order.
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const SentenceOutcome& a, const SentenceOutcome& b) {
                     return a.prediction.id < b.prediction.id;
                   });

  std::filesystem::create_directories(config.out_dir);
  std::filesystem::path predictions_path = config.out_dir / "predictions.jsonl";
  {
    std::ofstream out(predictions_path);
    if (!out)
      raise(ErrorKind::Data, "cannot write " + predictions_path.string());
    for (const SentenceOutcome& outcome : outcomes)
      out << serialize_sentence(outcome.prediction) << "\n";
  }

  json manifest;
  manifest["config"] = run_config_to_json(config);
  manifest["template_version"] = config.prompt_version;
  manifest["corpus"] = {{"train_sha256", sha256_file_hex(config.train)},
                        {"test_sha256", sha256_file_hex(config.test)}};
  json sentences = json::array();
  long prompt_tokens = 0, completion_tokens = 0;
  for (const SentenceOutcome& outcome : outcomes) {
    sentences.push_back(outcome.manifest_entry);
    if (outcome.manifest_entry.contains("usage")) {
      prompt_tokens +=
          outcome.manifest_entry["usage"]["prompt_tokens"].get<long>();
      completion_tokens +=
          outcome.manifest_entry["usage"]["completion_tokens"].get<long>();
    }
  }
  manifest["sentences"] = std::move(sentences);
  manifest["totals"] = {{"sentences", outcomes.size()},
                        {"prompt_tokens", prompt_tokens},
                        {"completion_tokens", completion_tokens}};

  std::filesystem::path manifest_path = config.out_dir / "manifest.json";
  write_text_file(manifest_path, manifest.dump(2) + "\n");

  // Wall-clock stats stay out of the manifest so reruns stay byte-identical.
  {
    std::ofstream log(config.out_dir / "run.log", std::ios::app);
    log << "subtask=" << config.subtask << " sentences=" << outcomes.size()
        << " transport_calls=" << transport->calls()
        << " cache_hits=" << client.cache_hits() << " wall_ms=" << wall_ms
        << "\n";
  }

  return {predictions_path, manifest_path, std::move(manifest)};
}

RunResult cmd_baseline(const BaselineConfig& config) {
  if (config.rule != "heuristic" && config.rule != "necessary")
    raise(ErrorKind::Config, "unknown baseline rule '" + config.rule + "'");
  if (config.test.empty() || config.out_dir.empty())
    raise(ErrorKind::Config, "test and out_dir are required");

  Corpus train;
  if (!config.train.empty()) train = load_corpus(config.train);
  Corpus test = load_corpus(config.test);
  SignatureMatrix matrix = mine_signatures(train, config.seed_static_table);

  std::map<std::string, const AnnotatedSentence*> mention_source;
  Corpus mentions;
  if (!config.mentions.empty()) {
    mentions = load_corpus(config.mentions);
    for (const AnnotatedSentence& s : mentions) mention_source[s.id] = &s;
  } else {
    for (const AnnotatedSentence& s : test) mention_source[s.id] = &s;
  }

  Corpus predictions;
  for (const AnnotatedSentence& s : test) {
    auto it = mention_source.find(s.id);
    AnnotatedSentence pred;
    pred.id = s.id;
    pred.doc_id = s.doc_id;
    pred.text = s.text;
    if (it != mention_source.end()) {
      pred.software = it->second->software;
      pred.attributes = it->second->attributes;
      pred.relations = config.rule == "heuristic"
                           ? relations::heuristic_baseline(*it->second, matrix)
                           : relations::necessary_baseline(*it->second, matrix);
    }
    predictions.push_back(std::move(pred));
  }

  std::filesystem::create_directories(config.out_dir);
  std::filesystem::path predictions_path = config.out_dir / "predictions.jsonl";
  save_corpus(predictions, predictions_path);

  json manifest = {{"rule", config.rule},
                   {"seed_static_table", config.seed_static_table},
                   {"sentences", predictions.size()}};
  std::filesystem::path manifest_path = config.out_dir / "manifest.json";
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  return {predictions_path, manifest_path, std::move(manifest)};
}

eval::EvalReport cmd_score(const std::filesystem::path& gold_path,
                           const std::filesystem::path& pred_path, int subtask,
                           const ScoreOptions& options) {
  Corpus gold = load_corpus(gold_path);
  Corpus pred = load_corpus(pred_path);
  eval::EvalReport report;
  switch (subtask) {
    case 1:
      report = eval::score_mentions(gold, pred, MentionList::Software,
                                    options.channel);
      break;
    case 2:
      report = eval::score_mentions(gold, pred, MentionList::Attributes,
                                    eval::LabelChannel::TypeOnly);
      break;
    case 3:
      report = eval::score_relations(gold, pred);
      break;
    default:
      raise(ErrorKind::Config, "subtask must be 1, 2 or 3");
  }
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    write_text_file(options.out_dir / "report.json",
                    eval::report_to_json(report).dump(2) + "\n");
    write_text_file(options.out_dir / "report.txt",
                    eval::format_report_table(report));
  }
  return report;
}

eval::ReportDelta cmd_compare(const std::filesystem::path& report_a,
                              const std::filesystem::path& report_b) {
  auto read_report = [](const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Data, "cannot open report " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
      raise(ErrorKind::Data, "report " + path.string() + " is not valid JSON");
    return eval::report_from_json(j);
  };
  return eval::compare_reports(read_report(report_a), read_report(report_b));
}

}  // namespace softmention::pipeline
