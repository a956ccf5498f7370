#include <algorithm>
#include <random>

#include "doctest.h"
#include "softmention/error.hpp"
#include "softmention/eval.hpp"
#include "test_util.hpp"

namespace sm = softmention;
namespace eval = softmention::eval;

namespace {

sm::Mention sw(const std::string& surface, size_t start,
               sm::EntityLabel label = sm::EntityLabel::Application,
               sm::IntentionLabel intent = sm::IntentionLabel::Usage) {
  return {surface, label, intent, {start, start + surface.size()}};
}

sm::AnnotatedSentence sentence(const std::string& id,
                               std::vector<sm::Mention> software) {
  sm::AnnotatedSentence s;
  s.id = id;
  s.text = std::string(64, 'x');
  s.software = std::move(software);
  return s;
}

}  // namespace

TEST_CASE("hand-computed weighted F1 on the two-label fixture") {
  // label A: support 3, two found plus one spurious -> P = R = F1 = 2/3
  // label B: support 1, exact -> F1 = 1
  // weighted F1 = (3 * 2/3 + 1 * 1) / 4 = 0.75
  sm::Corpus gold = {sentence(
      "s1", {sw("a1", 0), sw("a2", 4), sw("a3", 8),
             sw("b1", 12, sm::EntityLabel::OperatingSystem)})};
  sm::Corpus pred = {sentence(
      "s1", {sw("a1", 0), sw("a2", 4), sw("zz", 20),
             sw("b1", 12, sm::EntityLabel::OperatingSystem)})};
  eval::EvalReport report = eval::score_mentions(
      gold, pred, sm::MentionList::Software, eval::LabelChannel::TypeOnly);
  CHECK(report.weighted_f1 == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(report.weighted_precision == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(report.weighted_recall == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(report.per_label.at("Application").support == 3);
  CHECK(report.per_label.at("Application").f1 ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(report.per_label.at("OperatingSystem").f1 == doctest::Approx(1.0));
}

TEST_CASE("gold vs gold scores 1.0; gold vs empty scores 0.0") {
  sm::Corpus gold = sm::load_corpus(testutil::fixture("test.jsonl"));
  eval::EvalReport perfect = eval::score_mentions(
      gold, gold, sm::MentionList::Software,
      eval::LabelChannel::TypeAndIntention);
  CHECK(perfect.weighted_f1 == doctest::Approx(1.0));
  CHECK(perfect.weighted_precision == doctest::Approx(1.0));

  eval::EvalReport empty = eval::score_mentions(
      gold, {}, sm::MentionList::Software, eval::LabelChannel::TypeAndIntention);
  CHECK(empty.weighted_f1 == doctest::Approx(0.0));
  CHECK(empty.weighted_precision == doctest::Approx(0.0));

  eval::EvalReport relations_perfect = eval::score_relations(gold, gold);
  CHECK(relations_perfect.weighted_f1 == doctest::Approx(1.0));
  eval::EvalReport relations_empty = eval::score_relations(gold, {});
  CHECK(relations_empty.weighted_f1 == doctest::Approx(0.0));
}

TEST_CASE("intention channel splits span-correct predictions") {
  sm::Corpus gold = {sentence("s1", {sw("tool", 0, sm::EntityLabel::Application,
                                        sm::IntentionLabel::Creation)})};
  sm::Corpus pred = {sentence("s1", {sw("tool", 0, sm::EntityLabel::Application,
                                        sm::IntentionLabel::Usage)})};
  auto type_only = eval::score_mentions(gold, pred, sm::MentionList::Software,
                                        eval::LabelChannel::TypeOnly);
  CHECK(type_only.weighted_f1 == doctest::Approx(1.0));
  auto with_intent =
      eval::score_mentions(gold, pred, sm::MentionList::Software,
                           eval::LabelChannel::TypeAndIntention);
  CHECK(with_intent.weighted_f1 == doctest::Approx(0.0));
}

TEST_CASE("unknown prediction ids are an error; missing ones are misses") {
  sm::Corpus gold = {sentence("s1", {sw("a", 0)}), sentence("s2", {sw("b", 0)})};
  sm::Corpus missing_one = {sentence("s1", {sw("a", 0)})};
  auto report = eval::score_mentions(gold, missing_one,
                                     sm::MentionList::Software,
                                     eval::LabelChannel::TypeOnly);
  CHECK(report.weighted_recall == doctest::Approx(0.5));

  sm::Corpus unknown = {sentence("s9", {sw("a", 0)})};
  CHECK_THROWS_WITH_AS(
      eval::score_mentions(gold, unknown, sm::MentionList::Software,
                           eval::LabelChannel::TypeOnly),
      doctest::Contains("s9"), sm::Error);
}

TEST_CASE("relations scoring matches a hand count") {
  // four gold triples, three predicted, two of them correct
  sm::AnnotatedSentence g;
  g.id = "s1";
  g.text = std::string(64, 'x');
  g.software = {sw("A", 0), sw("B", 4)};
  g.attributes = {{"v1", sm::AttributeLabel::Version, std::nullopt, {8, 10}},
                  {"v2", sm::AttributeLabel::Version, std::nullopt, {12, 14}},
                  {"u", sm::AttributeLabel::URL, std::nullopt, {16, 17}},
                  {"c", sm::AttributeLabel::Citation, std::nullopt, {20, 21}}};
  auto triple = [](size_t si, sm::RelationType r, size_t oi) {
    sm::Relation rel;
    rel.subject = {sm::MentionList::Attributes, si};
    rel.relation = r;
    rel.object = {sm::MentionList::Software, oi};
    return rel;
  };
  g.relations = {triple(0, sm::RelationType::Version_of, 0),
                 triple(1, sm::RelationType::Version_of, 1),
                 triple(2, sm::RelationType::URL_of, 0),
                 triple(3, sm::RelationType::Citation_of, 0)};
  sm::AnnotatedSentence p = g;
  p.relations = {triple(0, sm::RelationType::Version_of, 0),   // correct
                 triple(1, sm::RelationType::Version_of, 0),   // wrong object
                 triple(2, sm::RelationType::URL_of, 0)};      // correct

  eval::EvalReport report = eval::score_relations({g}, {p});
  CHECK(report.per_label.at("Version_of").precision == doctest::Approx(0.5));
  CHECK(report.per_label.at("Version_of").recall == doctest::Approx(0.5));
  CHECK(report.per_label.at("URL_of").f1 == doctest::Approx(1.0));
  CHECK(report.per_label.at("Citation_of").recall == doctest::Approx(0.0));
  CHECK(report.per_label.at("Citation_of").support == 1);
  // weighted F1 = (2 * 0.5 + 1 * 1.0 + 1 * 0.0) / 4
  CHECK(report.weighted_f1 == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("weighted F1 is invariant under label renaming") {
  std::mt19937_64 rng(55);
  for (int round = 0; round < 20; ++round) {
    sm::Corpus gold, pred;
    sm::AnnotatedSentence g = sentence("s1", {});
    sm::AnnotatedSentence p = sentence("s1", {});
    std::vector<sm::EntityLabel> labels = {sm::EntityLabel::Application,
                                           sm::EntityLabel::OperatingSystem,
                                           sm::EntityLabel::PlugIn};
    for (size_t i = 0; i < 8; ++i) {
      sm::EntityLabel label = labels[rng() % labels.size()];
      g.software.push_back(sw("m" + std::to_string(i), i * 4, label));
      if (rng() % 2)
        p.software.push_back(sw("m" + std::to_string(i), i * 4,
                                rng() % 3 ? label
                                          : labels[rng() % labels.size()]));
    }
    gold.push_back(g);
    pred.push_back(p);
    auto base = eval::score_mentions(gold, pred, sm::MentionList::Software,
                                     eval::LabelChannel::TypeOnly);

    // permute the three labels consistently in gold and pred
    auto permute = [&](sm::Corpus corpus) {
      for (auto& s : corpus) {
        for (auto& m : s.software) {
          auto label = std::get<sm::EntityLabel>(m.label);
          if (label == labels[0]) m.label = labels[1];
          else if (label == labels[1]) m.label = labels[2];
          else if (label == labels[2]) m.label = labels[0];
        }
      }
      return corpus;
    };
    auto renamed = eval::score_mentions(permute(gold), permute(pred),
                                        sm::MentionList::Software,
                                        eval::LabelChannel::TypeOnly);
    CHECK(renamed.weighted_f1 == doctest::Approx(base.weighted_f1));
    CHECK(renamed.weighted_precision ==
          doctest::Approx(base.weighted_precision));
  }
}

TEST_CASE("adding a correct prediction never lowers any score") {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 20; ++round) {
    sm::AnnotatedSentence g = sentence("s1", {});
    for (size_t i = 0; i < 6; ++i)
      g.software.push_back(sw("m" + std::to_string(i), i * 4,
                              i % 2 ? sm::EntityLabel::Application
                                    : sm::EntityLabel::PlugIn));
    sm::AnnotatedSentence p = sentence("s1", {});
    std::vector<size_t> unused;
    for (size_t i = 0; i < 6; ++i) {
      if (rng() % 2)
        p.software.push_back(g.software[i]);
      else
        unused.push_back(i);
    }
    if (unused.empty()) continue;
    auto before = eval::score_mentions({g}, {p}, sm::MentionList::Software,
                                       eval::LabelChannel::TypeAndIntention);
    p.software.push_back(g.software[unused[rng() % unused.size()]]);
    auto after = eval::score_mentions({g}, {p}, sm::MentionList::Software,
                                      eval::LabelChannel::TypeAndIntention);
    CHECK(after.weighted_f1 >= before.weighted_f1 - 1e-12);
    for (const auto& [label, metrics] : before.per_label) {
      CHECK(after.per_label.at(label).f1 >= metrics.f1 - 1e-12);
    }
  }
}

TEST_CASE("compare_reports") {
  sm::Corpus gold = {sentence("s1", {sw("a", 0), sw("b", 4)})};
  sm::Corpus half = {sentence("s1", {sw("a", 0)})};
  auto full_report = eval::score_mentions(gold, gold, sm::MentionList::Software,
                                          eval::LabelChannel::TypeOnly);
  auto half_report = eval::score_mentions(gold, half, sm::MentionList::Software,
                                          eval::LabelChannel::TypeOnly);

  SUBCASE("identical reports give all-zero deltas") {
    auto delta = eval::compare_reports(full_report, full_report);
    CHECK(delta.weighted_f1 == doctest::Approx(0.0));
    for (const auto& [label, row] : delta.per_label) {
      CHECK(row.f1 == doctest::Approx(0.0));
    }
  }
  SUBCASE("improvement shows up as a positive aggregate delta") {
    auto delta = eval::compare_reports(half_report, full_report);
    CHECK(delta.weighted_f1 > 0.0);
  }
  SUBCASE("disjoint label sets cannot be compared") {
    eval::EvalReport a, b;
    a.per_label["Application"] = {};
    b.per_label["Version_of"] = {};
    CHECK_THROWS_AS(eval::compare_reports(a, b), sm::Error);
  }
}

TEST_CASE("report JSON and table round trips") {
  sm::Corpus gold = sm::load_corpus(testutil::fixture("test.jsonl"));
  auto report = eval::score_relations(gold, gold);
  auto json = eval::report_to_json(report);
  auto back = eval::report_from_json(json);
  CHECK(back.weighted_f1 == doctest::Approx(report.weighted_f1));
  CHECK(back.per_label.size() == report.per_label.size());

  std::string table = eval::format_report_table(report);
  CHECK(table.find("label") != std::string::npos);
  CHECK(table.find("weighted") != std::string::npos);
  CHECK(table.find("1.000") != std::string::npos);
}
