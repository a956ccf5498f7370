#include "softmention.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "softmention/corpus.hpp"
#include "softmention/error.hpp"
#include "softmention/eval.hpp"
#include "softmention/pipeline.hpp"

using nlohmann::json;
namespace sm = softmention;

struct smx_corpus {
  sm::Corpus value;
};

struct smx_matrix {
  sm::SignatureMatrix value;
};

namespace {

thread_local std::string g_last_error;

smx_status status_for(const sm::Error& e) {
  switch (e.kind()) {
    case sm::ErrorKind::Config: return SMX_ERR_CONFIG;
    case sm::ErrorKind::Data: return SMX_ERR_DATA;
    case sm::ErrorKind::Transport: return SMX_ERR_TRANSPORT;
    case sm::ErrorKind::Parse: return SMX_ERR_DATA;
    case sm::ErrorKind::Internal: return SMX_ERR_INTERNAL;
  }
  return SMX_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
smx_status guarded(Fn&& fn) {
  try {
    fn();
    return SMX_OK;
  } catch (const sm::Error& e) {
    g_last_error = e.what();
    return status_for(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SMX_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SMX_ERR_INTERNAL;
  }
}

smx_status bad_argument(const char* message) {
  g_last_error = message;
  return SMX_ERR_CONFIG;
}

}  // namespace

extern "C" {

const char* smx_version(void) { return "0.1.0"; }

const char* smx_last_error(void) { return g_last_error.c_str(); }

void smx_string_free(char* s) { std::free(s); }

smx_status smx_corpus_open(const char* path, smx_corpus** out) {
  if (!path || !out) return bad_argument("smx_corpus_open: NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = new smx_corpus{sm::load_corpus(path)};
    *out = handle;
  });
}

smx_status smx_corpus_open_lenient(const char* path, smx_corpus** out) {
  if (!path || !out)
    return bad_argument("smx_corpus_open_lenient: NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = new smx_corpus{sm::load_corpus(path, {}, false)};
    *out = handle;
  });
}

void smx_corpus_close(smx_corpus* corpus) { delete corpus; }

size_t smx_corpus_size(const smx_corpus* corpus) {
  return corpus ? corpus->value.size() : 0;
}

smx_status smx_corpus_validate(const smx_corpus* corpus,
                               char** report_json_out) {
  if (!corpus || !report_json_out)
    return bad_argument("smx_corpus_validate: NULL argument");
  return guarded([&] {
    sm::ValidationReport report = sm::validate_corpus(corpus->value);
    json issues = json::array();
    for (const sm::ValidationIssue& issue : report.issues)
      issues.push_back({{"sentence_id", issue.sentence_id},
                        {"message", issue.message}});
    *report_json_out = dup_string(issues.dump());
  });
}

smx_status smx_mine_signatures(const smx_corpus* train,
                               int seed_with_static_table, smx_matrix** out) {
  if (!train || !out) return bad_argument("smx_mine_signatures: NULL argument");
  *out = nullptr;
  return guarded([&] {
    *out = new smx_matrix{
        sm::mine_signatures(train->value, seed_with_static_table != 0)};
  });
}

void smx_matrix_free(smx_matrix* matrix) { delete matrix; }

smx_status smx_matrix_to_json(const smx_matrix* matrix, char** json_out) {
  if (!matrix || !json_out)
    return bad_argument("smx_matrix_to_json: NULL argument");
  return guarded([&] {
    json entries = json::array();
    for (const auto& [signature, count] : matrix->value.entries()) {
      entries.push_back({{"subject", sm::label_name(signature.subject)},
                         {"relation", std::string(to_string(signature.relation))},
                         {"object", sm::label_name(signature.object)},
                         {"count", count}});
    }
    *json_out = dup_string(entries.dump());
  });
}

smx_status smx_run(const char* config_json, char** manifest_json_out) {
  if (!config_json || !manifest_json_out)
    return bad_argument("smx_run: NULL argument");
  return guarded([&] {
    json j = json::parse(config_json, nullptr, false);
    if (j.is_discarded())
      sm::raise(sm::ErrorKind::Config, "config is not valid JSON");
    sm::pipeline::RunResult result =
        sm::pipeline::cmd_run(sm::pipeline::run_config_from_json(j));
    *manifest_json_out = dup_string(result.manifest.dump());
  });
}

smx_status smx_baseline(const char* config_json, char** predictions_path_out) {
  if (!config_json || !predictions_path_out)
    return bad_argument("smx_baseline: NULL argument");
  return guarded([&] {
    json j = json::parse(config_json, nullptr, false);
    if (j.is_discarded())
      sm::raise(sm::ErrorKind::Config, "config is not valid JSON");
    sm::pipeline::BaselineConfig config;
    config.rule = j.value("rule", config.rule);
    config.seed_static_table =
        j.value("seed_static_table", config.seed_static_table);
    config.train = j.value("train", std::string());
    config.test = j.value("test", std::string());
    config.mentions = j.value("mentions", std::string());
    config.out_dir = j.value("out_dir", std::string());
    sm::pipeline::RunResult result = sm::pipeline::cmd_baseline(config);
    *predictions_path_out = dup_string(result.predictions_path.string());
  });
}

smx_status smx_score(const char* gold_path, const char* pred_path, int subtask,
                     const char* options_json, char** report_json_out) {
  if (!gold_path || !pred_path || !report_json_out)
    return bad_argument("smx_score: NULL argument");
  return guarded([&] {
    sm::pipeline::ScoreOptions options;
    if (options_json && *options_json) {
      json j = json::parse(options_json, nullptr, false);
      if (j.is_discarded())
        sm::raise(sm::ErrorKind::Config, "options are not valid JSON");
      std::string channel = j.value("channel", "type_and_intention");
      if (channel == "type_only") {
        options.channel = sm::eval::LabelChannel::TypeOnly;
      } else if (channel == "type_and_intention") {
        options.channel = sm::eval::LabelChannel::TypeAndIntention;
      } else {
        sm::raise(sm::ErrorKind::Config, "unknown channel '" + channel + "'");
      }
      options.out_dir = j.value("out_dir", std::string());
    }
    sm::eval::EvalReport report =
        sm::pipeline::cmd_score(gold_path, pred_path, subtask, options);
    *report_json_out = dup_string(sm::eval::report_to_json(report).dump());
  });
}

smx_status smx_format_report(const char* report_json, char** table_out) {
  if (!report_json || !table_out)
    return bad_argument("smx_format_report: NULL argument");
  return guarded([&] {
    json j = json::parse(report_json, nullptr, false);
    if (j.is_discarded())
      sm::raise(sm::ErrorKind::Data, "report is not valid JSON");
    *table_out =
        dup_string(sm::eval::format_report_table(sm::eval::report_from_json(j)));
  });
}

smx_status smx_compare(const char* report_a_path, const char* report_b_path,
                       char** delta_json_out) {
  if (!report_a_path || !report_b_path || !delta_json_out)
    return bad_argument("smx_compare: NULL argument");
  return guarded([&] {
    sm::eval::ReportDelta delta =
        sm::pipeline::cmd_compare(report_a_path, report_b_path);
    *delta_json_out = dup_string(sm::eval::delta_to_json(delta).dump());
  });
}

smx_status smx_format_delta(const char* delta_json, char** table_out) {
  if (!delta_json || !table_out)
    return bad_argument("smx_format_delta: NULL argument");
  return guarded([&] {
    json j = json::parse(delta_json, nullptr, false);
    if (j.is_discarded())
      sm::raise(sm::ErrorKind::Data, "delta is not valid JSON");
    sm::eval::ReportDelta delta;
    for (const auto& [label, row] : j.at("per_label").items()) {
      delta.per_label[label] = {row.at("precision").get<double>(),
                                row.at("recall").get<double>(),
                                row.at("f1").get<double>(),
                                row.at("support_a").get<long>(),
                                row.at("support_b").get<long>()};
    }
    delta.weighted_precision = j.at("weighted_precision").get<double>();
    delta.weighted_recall = j.at("weighted_recall").get<double>();
    delta.weighted_f1 = j.at("weighted_f1").get<double>();
    *table_out = dup_string(sm::eval::format_delta_table(delta));
  });
}

}  // extern "C"
