#pragma once

// Span-exact scoring with per-label precision/recall/F1 and support-weighted
// aggregates.

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "softmention/corpus.hpp"

namespace softmention::eval {

enum class LabelChannel { TypeOnly, TypeAndIntention };

struct LabelMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

struct EvalReport {
  std::map<std::string, LabelMetrics> per_label;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::string matching_mode = "exact_span";
};

// A prediction is a true positive iff its span matches a gold span exactly
// and the labels match under the channel. Predictions for sentence ids
// absent from the gold corpus are an error; gold sentences without a
// predicted counterpart count as all-missed.
EvalReport score_mentions(const Corpus& gold, const Corpus& pred,
                          MentionList which, LabelChannel channel);

// True positive iff subject span, relation type, and object span all match.
// Per-relation-type breakdown, weighted over relation types.
EvalReport score_relations(const Corpus& gold, const Corpus& pred);

struct DeltaRow {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support_a = 0;
  long support_b = 0;
};

struct ReportDelta {
  std::map<std::string, DeltaRow> per_label;  // b minus a
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
};

// Deltas b - a over the union of label rows. Reports with disjoint label
// sets cannot be compared.
ReportDelta compare_reports(const EvalReport& a, const EvalReport& b);

std::string format_report_table(const EvalReport& report);
std::string format_delta_table(const ReportDelta& delta);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
nlohmann::json delta_to_json(const ReportDelta& delta);

}  // namespace softmention::eval
