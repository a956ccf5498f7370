#include "softmention/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "softmention/error.hpp"

namespace softmention::eval {

namespace {

using nlohmann::json;

struct Tally {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

LabelMetrics metrics_from_tally(const Tally& t) {
  LabelMetrics m;
  m.precision = safe_div(t.tp, t.tp + t.fp);
  m.recall = safe_div(t.tp, t.tp + t.fn);
  m.f1 = safe_div(2.0 * m.precision * m.recall, m.precision + m.recall);
  m.support = t.tp + t.fn;
  return m;
}

EvalReport finalize(const std::map<std::string, Tally>& tallies) {
  EvalReport report;
  double sum_support = 0.0, sum_p = 0.0, sum_r = 0.0, sum_f1 = 0.0;
  for (const auto& [label, tally] : tallies) {
    LabelMetrics m = metrics_from_tally(tally);
    report.per_label[label] = m;
    if (m.support > 0) {
      sum_support += m.support;
      sum_p += m.support * m.precision;
      sum_r += m.support * m.recall;
      sum_f1 += m.support * m.f1;
    }
  }
  report.weighted_precision = safe_div(sum_p, sum_support);
  report.weighted_recall = safe_div(sum_r, sum_support);
  report.weighted_f1 = safe_div(sum_f1, sum_support);
  return report;
}

// Multiset key for one mention under a channel.
std::tuple<size_t, size_t, std::string, std::string> mention_key(
    const Mention& m, LabelChannel channel) {
  std::string intention;
  if (channel == LabelChannel::TypeAndIntention && m.intention)
    intention = std::string(to_string(*m.intention));
  return {m.span.start, m.span.end, label_name(m.label), intention};
}

const std::vector<Mention>& pick_list(const AnnotatedSentence& s,
                                      MentionList which) {
  return which == MentionList::Software ? s.software : s.attributes;
}

std::map<std::string, const AnnotatedSentence*> index_by_id(const Corpus& c) {
  std::map<std::string, const AnnotatedSentence*> index;
  for (const AnnotatedSentence& s : c) index[s.id] = &s;
  return index;
}

void check_pred_ids(const Corpus& gold, const Corpus& pred) {
  auto gold_ids = index_by_id(gold);
  std::vector<std::string> unknown;
  for (const AnnotatedSentence& s : pred) {
    if (!gold_ids.count(s.id)) unknown.push_back(s.id);
  }
  if (!unknown.empty()) {
    std::string joined;
    for (const std::string& id : unknown) {
      if (!joined.empty()) joined += ", ";
      joined += id;
    }
    raise(ErrorKind::Data,
          "prediction sentence ids not present in gold: " + joined);
  }
}

}  // namespace

EvalReport score_mentions(const Corpus& gold, const Corpus& pred,
                          MentionList which, LabelChannel channel) {
  check_pred_ids(gold, pred);
  auto pred_by_id = index_by_id(pred);

  std::map<std::string, Tally> tallies;
  for (const AnnotatedSentence& gold_sentence : gold) {
    const std::vector<Mention>& gold_mentions = pick_list(gold_sentence, which);
    std::vector<Mention> pred_mentions;
    if (auto it = pred_by_id.find(gold_sentence.id); it != pred_by_id.end())
      pred_mentions = pick_list(*it->second, which);

    std::multiset<std::tuple<size_t, size_t, std::string, std::string>>
        unmatched_gold;
    for (const Mention& m : gold_mentions)
      unmatched_gold.insert(mention_key(m, channel));

    for (const Mention& m : pred_mentions) {
      auto key = mention_key(m, channel);
      auto it = unmatched_gold.find(key);
      if (it != unmatched_gold.end()) {
        unmatched_gold.erase(it);
        tallies[label_name(m.label)].tp += 1;
      } else {
        tallies[label_name(m.label)].fp += 1;
      }
    }
    for (const auto& key : unmatched_gold)
      tallies[std::get<2>(key)].fn += 1;
  }
  return finalize(tallies);
}

EvalReport score_relations(const Corpus& gold, const Corpus& pred) {
  check_pred_ids(gold, pred);
  auto pred_by_id = index_by_id(pred);

  auto triple_key = [](const AnnotatedSentence& s, const Relation& r) {
    const Mention& subject = s.mention(r.subject);
    const Mention& object = s.mention(r.object);
    return std::make_tuple(subject.span.start, subject.span.end,
                           std::string(to_string(r.relation)),
                           object.span.start, object.span.end);
  };

  std::map<std::string, Tally> tallies;
  for (const AnnotatedSentence& gold_sentence : gold) {
    std::multiset<std::tuple<size_t, size_t, std::string, size_t, size_t>>
        unmatched_gold;
    for (const Relation& r : gold_sentence.relations)
      unmatched_gold.insert(triple_key(gold_sentence, r));

    if (auto it = pred_by_id.find(gold_sentence.id); it != pred_by_id.end()) {
      for (const Relation& r : it->second->relations) {
        auto key = triple_key(*it->second, r);
        auto found = unmatched_gold.find(key);
        if (found != unmatched_gold.end()) {
          unmatched_gold.erase(found);
          tallies[std::get<2>(key)].tp += 1;
        } else {
          tallies[std::get<2>(key)].fp += 1;
        }
      }
    }
    for (const auto& key : unmatched_gold) tallies[std::get<2>(key)].fn += 1;
  }
  return finalize(tallies);
}

ReportDelta compare_reports(const EvalReport& a, const EvalReport& b) {
  bool any_shared = false;
  for (const auto& [label, metrics] : a.per_label) {
    if (b.per_label.count(label)) {
      any_shared = true;
      break;
    }
  }
  if ((!a.per_label.empty() || !b.per_label.empty()) && !any_shared)
    raise(ErrorKind::Config, "cannot compare reports with disjoint label sets");

  ReportDelta delta;
  std::set<std::string> labels;
  for (const auto& [label, m] : a.per_label) labels.insert(label);
  for (const auto& [label, m] : b.per_label) labels.insert(label);
  for (const std::string& label : labels) {
    LabelMetrics ma, mb;
    if (auto it = a.per_label.find(label); it != a.per_label.end())
      ma = it->second;
    if (auto it = b.per_label.find(label); it != b.per_label.end())
      mb = it->second;
    delta.per_label[label] = {mb.precision - ma.precision,
                              mb.recall - ma.recall, mb.f1 - ma.f1,
                              ma.support, mb.support};
  }
  delta.weighted_precision = b.weighted_precision - a.weighted_precision;
  delta.weighted_recall = b.weighted_recall - a.weighted_recall;
  delta.weighted_f1 = b.weighted_f1 - a.weighted_f1;
  return delta;
}

namespace {

std::string fixed3(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << v;
  return out.str();
}

void table_row(std::ostringstream& out, const std::string& label,
               const std::string& p, const std::string& r,
               const std::string& f1, const std::string& support) {
  out << std::left << std::setw(42) << label << std::right << std::setw(10)
      << p << std::setw(10) << r << std::setw(10) << f1 << std::setw(10)
      << support << "\n";
}

}  // namespace

std::string format_report_table(const EvalReport& report) {
  std::ostringstream out;
  table_row(out, "label", "precision", "recall", "f1", "support");
  for (const auto& [label, m] : report.per_label) {
    table_row(out, label, fixed3(m.precision), fixed3(m.recall), fixed3(m.f1),
              std::to_string(m.support));
  }
  long total_support = 0;
  for (const auto& [label, m] : report.per_label) total_support += m.support;
  table_row(out, "weighted", fixed3(report.weighted_precision),
            fixed3(report.weighted_recall), fixed3(report.weighted_f1),
            std::to_string(total_support));
  return out.str();
}

std::string format_delta_table(const ReportDelta& delta) {
  std::ostringstream out;
  table_row(out, "label", "d_prec", "d_recall", "d_f1", "support b");
  for (const auto& [label, row] : delta.per_label) {
    table_row(out, label, fixed3(row.precision), fixed3(row.recall),
              fixed3(row.f1), std::to_string(row.support_b));
  }
  table_row(out, "weighted", fixed3(delta.weighted_precision),
            fixed3(delta.weighted_recall), fixed3(delta.weighted_f1), "");
  return out.str();
}

json report_to_json(const EvalReport& report) {
  json per_label = json::object();
  for (const auto& [label, m] : report.per_label) {
    per_label[label] = {{"precision", m.precision},
                        {"recall", m.recall},
                        {"f1", m.f1},
                        {"support", m.support}};
  }
  return {{"matching_mode", report.matching_mode},
          {"per_label", per_label},
          {"weighted_precision", report.weighted_precision},
          {"weighted_recall", report.weighted_recall},
          {"weighted_f1", report.weighted_f1}};
}

EvalReport report_from_json(const json& j) {
  EvalReport report;
  report.matching_mode = j.value("matching_mode", "exact_span");
  for (const auto& [label, m] : j.at("per_label").items()) {
    report.per_label[label] = {m.at("precision").get<double>(),
                               m.at("recall").get<double>(),
                               m.at("f1").get<double>(),
                               m.at("support").get<long>()};
  }
  report.weighted_precision = j.at("weighted_precision").get<double>();
  report.weighted_recall = j.at("weighted_recall").get<double>();
  report.weighted_f1 = j.at("weighted_f1").get<double>();
  return report;
}

json delta_to_json(const ReportDelta& delta) {
  json per_label = json::object();
  for (const auto& [label, row] : delta.per_label) {
    per_label[label] = {{"precision", row.precision},
                        {"recall", row.recall},
                        {"f1", row.f1},
                        {"support_a", row.support_a},
                        {"support_b", row.support_b}};
  }
  return {{"per_label", per_label},
          {"weighted_precision", delta.weighted_precision},
          {"weighted_recall", delta.weighted_recall},
          {"weighted_f1", delta.weighted_f1}};
}

}  // namespace softmention::eval
