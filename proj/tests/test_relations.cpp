#include <algorithm>
#include <random>
#include <set>
#include <tuple>

#include "doctest.h"
#include "softmention/corpus.hpp"
#include "softmention/relations.hpp"
#include "test_util.hpp"

namespace sm = softmention;
namespace relations = softmention::relations;

namespace {

const sm::AnnotatedSentence& by_id(const sm::Corpus& corpus,
                                   const std::string& id) {
  for (const auto& s : corpus) {
    if (s.id == id) return s;
  }
  throw std::runtime_error("missing fixture sentence " + id);
}

using TripleKey = std::tuple<sm::MentionRef, sm::RelationType, sm::MentionRef>;

std::set<TripleKey> claim_set(const std::vector<relations::Question>& questions) {
  std::set<TripleKey> out;
  for (const auto& q : questions) {
    for (const auto& c : q.claims)
      out.insert({c.subject.ref, c.relation, c.object.ref});
  }
  return out;
}

std::set<TripleKey> relation_set(const std::vector<sm::Relation>& relations_) {
  std::set<TripleKey> out;
  for (const auto& r : relations_) out.insert({r.subject, r.relation, r.object});
  return out;
}

// Brute-force enumeration oracle: every ordered mention pair crossed with
// every relation type the subject's label can ask about, filtered by matrix
// membership.
std::set<TripleKey> brute_force_claims(const sm::AnnotatedSentence& s,
                                       const sm::SignatureMatrix& matrix) {
  std::vector<std::pair<sm::Mention, sm::MentionRef>> handles;
  for (size_t i = 0; i < s.software.size(); ++i)
    handles.push_back({s.software[i], {sm::MentionList::Software, i}});
  for (size_t i = 0; i < s.attributes.size(); ++i)
    handles.push_back({s.attributes[i], {sm::MentionList::Attributes, i}});
  std::set<TripleKey> out;
  for (const auto& [subject, subject_ref] : handles) {
    std::vector<sm::RelationType> rels;
    if (sm::is_attribute(subject.label)) {
      rels = {sm::canonical_relation(std::get<sm::AttributeLabel>(subject.label))};
    } else {
      rels = {sm::RelationType::PlugIn_of, sm::RelationType::Specification_of};
    }
    for (sm::RelationType rel : rels) {
      for (const auto& [object, object_ref] : handles) {
        if (object_ref == subject_ref) continue;
        if (matrix.admissible(subject.label, rel, object.label))
          out.insert({subject_ref, rel, object_ref});
      }
    }
  }
  return out;
}

sm::AnnotatedSentence random_sentence(std::mt19937_64& rng) {
  sm::AnnotatedSentence s;
  s.id = "rnd";
  size_t n = 2 + rng() % 5;
  size_t pos = 0;
  std::string text;
  for (size_t i = 0; i < n; ++i) {
    std::string token = "m" + std::to_string(i);
    if (!text.empty()) {
      text += " ";
      pos += 1;
    }
    sm::Mention m;
    m.surface = token;
    m.span = {pos, pos + token.size()};
    if (rng() % 2 == 0) {
      m.label = sm::kAllEntityLabels[rng() % sm::kAllEntityLabels.size()];
      m.intention = sm::IntentionLabel::Usage;
      s.software.push_back(m);
    } else {
      m.label = sm::kAllAttributeLabels[rng() % sm::kAllAttributeLabels.size()];
      s.attributes.push_back(m);
    }
    text += token;
    pos += token.size();
  }
  s.text = text;
  return s;
}

sm::SignatureMatrix random_matrix(std::mt19937_64& rng) {
  sm::SignatureMatrix m;
  auto random_label = [&]() -> sm::Label {
    if (rng() % 2 == 0)
      return sm::kAllEntityLabels[rng() % sm::kAllEntityLabels.size()];
    return sm::kAllAttributeLabels[rng() % sm::kAllAttributeLabels.size()];
  };
  size_t n = 4 + rng() % 24;
  for (size_t i = 0; i < n; ++i) {
    sm::Label subject = random_label();
    sm::RelationType rel =
        sm::is_attribute(subject)
            ? sm::canonical_relation(std::get<sm::AttributeLabel>(subject))
            : (rng() % 2 ? sm::RelationType::PlugIn_of
                         : sm::RelationType::Specification_of);
    m.add({subject, rel, random_label()});
  }
  return m;
}

sm::AnnotatedSentence two_software_one_attribute(
    size_t left_start, size_t right_start, size_t attr_start,
    sm::AttributeLabel attr = sm::AttributeLabel::Version) {
  // layout helper; spans are what matters, surfaces are nominal
  sm::AnnotatedSentence s;
  s.id = "synth";
  s.text = std::string(80, 'x');
  s.software.push_back({"A", sm::EntityLabel::Application,
                        sm::IntentionLabel::Usage,
                        {left_start, left_start + 2}});
  s.software.push_back({"B", sm::EntityLabel::Application,
                        sm::IntentionLabel::Usage,
                        {right_start, right_start + 2}});
  s.attributes.push_back({"v", attr, std::nullopt, {attr_start, attr_start + 2}});
  return s;
}

}  // namespace

TEST_CASE("enumerate_claims on the citation/url fixture") {
  sm::Corpus train = sm::load_corpus(testutil::fixture("train.jsonl"));
  sm::SignatureMatrix matrix = sm::mine_signatures(train, false);
  const sm::AnnotatedSentence& fragit = by_id(train, "t03");

  auto questions = relations::enumerate_claims(fragit, matrix);
  REQUIRE(questions.size() == 2);
  CHECK(questions[0].relation == sm::RelationType::Citation_of);
  CHECK(questions[0].subject.mention.surface == "[44]");
  REQUIRE(questions[0].claims.size() == 2);
  CHECK(questions[0].claims[0].object.mention.surface == "web service");
  CHECK(questions[0].claims[1].object.mention.surface == "GAMESS");
  CHECK(questions[1].relation == sm::RelationType::URL_of);
  REQUIRE(questions[1].claims.size() == 2);
  CHECK(questions[1].claims[0].statement() ==
        "'http://www.fragit.org' is the url of 'web service'.");
}

TEST_CASE("claim statements use the lowercase relation phrases") {
  sm::Corpus train = sm::load_corpus(testutil::fixture("train.jsonl"));
  sm::SignatureMatrix matrix = sm::mine_signatures(train, true);
  const sm::AnnotatedSentence& aspasia = by_id(train, "t04");
  auto questions = relations::enumerate_claims(aspasia, matrix);
  bool found = false;
  for (const auto& q : questions) {
    for (const auto& c : q.claims) {
      if (c.statement() == "'2.0' is the version of 'Artistic License'.")
        found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("enumerate_claims: no admissible partner, no question") {
  sm::AnnotatedSentence s;
  s.id = "x";
  s.text = "OnlyTool here";
  s.software.push_back({"OnlyTool", sm::EntityLabel::Application,
                        sm::IntentionLabel::Usage, {0, 8}});
  CHECK(relations::enumerate_claims(s, sm::static_signature_grid()).empty());
}

TEST_CASE("claim soundness and completeness against the brute-force oracle") {
  std::mt19937_64 rng(777);
  for (int round = 0; round < 60; ++round) {
    sm::AnnotatedSentence s = random_sentence(rng);
    sm::SignatureMatrix matrix =
        (round % 3 == 0) ? sm::mine_signatures({}, true) : random_matrix(rng);
    auto questions = relations::enumerate_claims(s, matrix);
    // soundness: every claim signature is admissible
    for (const auto& q : questions) {
      for (const auto& c : q.claims) {
        CHECK(matrix.admissible(c.subject.mention.label, c.relation,
                                c.object.mention.label));
        CHECK_FALSE(c.subject.ref == c.object.ref);
      }
    }
    // completeness: set equality with the oracle
    CHECK(claim_set(questions) == brute_force_claims(s, matrix));
  }
}

TEST_CASE("decide_relations: single true answer wins") {
  sm::Corpus test = sm::load_corpus(testutil::fixture("test.jsonl"));
  sm::Corpus train = sm::load_corpus(testutil::fixture("train.jsonl"));
  sm::SignatureMatrix matrix = sm::mine_signatures(train, true);
  const sm::AnnotatedSentence& webtool = by_id(test, "e02");
  auto questions = relations::enumerate_claims(webtool, matrix);

  std::vector<relations::AnsweredQuestion> answered;
  for (const auto& q : questions) {
    relations::AnsweredQuestion aq;
    aq.question = q;
    for (const auto& c : q.claims)
      aq.answers.push_back(relations::gold_has_triple(webtool, c));
    answered.push_back(std::move(aq));
  }
  auto decided = relations::decide_relations(webtool, answered, true, matrix);
  REQUIRE(decided.size() == 1);
  CHECK(decided[0].relation == sm::RelationType::URL_of);
  CHECK(decided[0].object == sm::MentionRef{sm::MentionList::Software, 0});
  CHECK(decided[0].provenance == "qa");
}

namespace {

const relations::Question& version_question(
    const std::vector<relations::Question>& questions) {
  for (const auto& q : questions) {
    if (q.relation == sm::RelationType::Version_of) return q;
  }
  throw std::runtime_error("no version question");
}

}  // namespace

TEST_CASE("decide_relations: multiple trues prefer the left-side object") {
  // objects at distance 5 (left) and 3 (right) of the subject
  sm::AnnotatedSentence s = two_software_one_attribute(3, 15, 10);
  sm::SignatureMatrix matrix = sm::mine_signatures({}, true);
  auto questions = relations::enumerate_claims(s, matrix);
  const relations::Question& q = version_question(questions);
  REQUIRE(q.claims.size() == 2);

  relations::AnsweredQuestion aq;
  aq.question = q;
  aq.answers = {true, true};
  auto decided = relations::decide_relations(s, {aq}, true, matrix);
  REQUIRE(decided.size() == 1);
  CHECK(decided[0].object == sm::MentionRef{sm::MentionList::Software, 0});
}

TEST_CASE("decide_relations: all false abstains unless fallback is on") {
  sm::AnnotatedSentence s = two_software_one_attribute(3, 15, 10);
  sm::SignatureMatrix matrix = sm::mine_signatures({}, true);
  auto questions = relations::enumerate_claims(s, matrix);
  relations::AnsweredQuestion aq;
  aq.question = version_question(questions);
  aq.answers = {false, false};

  auto without = relations::decide_relations(s, {aq}, false, matrix);
  CHECK(without.empty());

  auto with = relations::decide_relations(s, {aq}, true, matrix);
  REQUIRE(with.size() == 1);
  CHECK(with[0].provenance == "heuristic_fallback");
  CHECK(with[0].object == sm::MentionRef{sm::MentionList::Software, 0});

  // missing answers behave like false
  relations::AnsweredQuestion missing;
  missing.question = version_question(questions);
  missing.answers = {std::nullopt, std::nullopt};
  auto fallback = relations::decide_relations(s, {missing}, true, matrix);
  CHECK(fallback.size() == 1);
}

TEST_CASE("decide_relations emits at most one object per subject-relation") {
  std::mt19937_64 rng(4242);
  sm::SignatureMatrix matrix = sm::mine_signatures({}, true);
  for (int round = 0; round < 40; ++round) {
    sm::AnnotatedSentence s = random_sentence(rng);
    auto questions = relations::enumerate_claims(s, matrix);
    std::vector<relations::AnsweredQuestion> answered;
    for (const auto& q : questions) {
      relations::AnsweredQuestion aq;
      aq.question = q;
      for (size_t i = 0; i < q.claims.size(); ++i)
        aq.answers.push_back(rng() % 3 == 0);
      answered.push_back(std::move(aq));
    }
    auto decided = relations::decide_relations(s, answered, true, matrix);
    std::set<std::pair<sm::MentionRef, sm::RelationType>> keys;
    for (const auto& r : decided)
      CHECK(keys.insert({r.subject, r.relation}).second);
  }
}

TEST_CASE("heuristic baseline attaches to the nearest admissible left mention") {
  sm::Corpus test = sm::load_corpus(testutil::fixture("test.jsonl"));
  sm::Corpus train = sm::load_corpus(testutil::fixture("train.jsonl"));
  sm::SignatureMatrix matrix = sm::mine_signatures(train, true);

  SUBCASE("the license/version fixture is a known failure case") {
    const sm::AnnotatedSentence& aspasia = by_id(test, "e03");
    auto predicted = relations::heuristic_baseline(aspasia, matrix);
    REQUIRE(predicted.size() == 3);
    auto set = relation_set(predicted);
    // url and license attach to the software entity, correctly
    CHECK(set.count({{sm::MentionList::Attributes, 2}, sm::RelationType::URL_of,
                     {sm::MentionList::Software, 0}}));
    CHECK(set.count({{sm::MentionList::Attributes, 0},
                     sm::RelationType::License_of,
                     {sm::MentionList::Software, 0}}));
    // the version also lands on the software entity, but gold links it to
    // the license span, which left-attachment cannot produce
    CHECK(set.count({{sm::MentionList::Attributes, 1},
                     sm::RelationType::Version_of,
                     {sm::MentionList::Software, 0}}));
    CHECK_FALSE(set.count({{sm::MentionList::Attributes, 1},
                           sm::RelationType::Version_of,
                           {sm::MentionList::Attributes, 0}}));
  }

  SUBCASE("software only to the right attaches via the fallback") {
    sm::AnnotatedSentence s = two_software_one_attribute(20, 40, 3);
    auto predicted = relations::heuristic_baseline(s, matrix);
    REQUIRE(predicted.size() == 1);
    CHECK(predicted[0].object == sm::MentionRef{sm::MentionList::Software, 0});
    CHECK(predicted[0].provenance == "heuristic");
  }

  SUBCASE("inner-software relations are never emitted") {
    const sm::AnnotatedSentence& cluego = by_id(test, "e08");
    for (const auto& r : relations::heuristic_baseline(cluego, matrix)) {
      CHECK(r.relation != sm::RelationType::PlugIn_of);
      CHECK(r.relation != sm::RelationType::Specification_of);
    }
  }
}

TEST_CASE("heuristic baseline equals the nearest-left-else-right oracle") {
  std::mt19937_64 rng(1313);
  sm::SignatureMatrix matrix = sm::mine_signatures({}, true);
  for (int round = 0; round < 60; ++round) {
    sm::AnnotatedSentence s = random_sentence(rng);
    auto predicted = relations::heuristic_baseline(s, matrix);
    std::set<TripleKey> expected;
    for (size_t i = 0; i < s.attributes.size(); ++i) {
      const sm::Mention& a = s.attributes[i];
      sm::RelationType rel =
          sm::canonical_relation(std::get<sm::AttributeLabel>(a.label));
      const sm::Mention* best = nullptr;
      size_t best_idx = 0;
      bool best_left = false;
      for (size_t k = 0; k < s.software.size(); ++k) {
        const sm::Mention& o = s.software[k];
        if (!matrix.admissible(a.label, rel, o.label)) continue;
        bool left = o.span.end <= a.span.start;
        bool better = false;
        if (!best) {
          better = true;
        } else if (left != best_left) {
          better = left;
        } else if (left) {
          better = o.span.end > best->span.end;
        } else {
          better = o.span.start < best->span.start;
        }
        if (better) {
          best = &o;
          best_idx = k;
          best_left = left;
        }
      }
      if (best)
        expected.insert({{sm::MentionList::Attributes, i}, rel,
                         {sm::MentionList::Software, best_idx}});
    }
    CHECK(relation_set(predicted) == expected);

    // determinism
    auto again = relations::heuristic_baseline(s, matrix);
    CHECK(relation_set(again) == relation_set(predicted));
  }
}

TEST_CASE("necessary baseline emits only unambiguous triples") {
  sm::Corpus test = sm::load_corpus(testutil::fixture("test.jsonl"));
  sm::Corpus train = sm::load_corpus(testutil::fixture("train.jsonl"));
  sm::SignatureMatrix matrix = sm::mine_signatures(train, true);

  SUBCASE("single software plus one version is forced") {
    const sm::AnnotatedSentence& gromacs = by_id(test, "e04");
    auto predicted = relations::necessary_baseline(gromacs, matrix);
    CHECK(predicted.size() == 2);
    for (const auto& r : predicted) CHECK(r.provenance == "necessary");
  }
  SUBCASE("two admissible partners emit nothing") {
    const sm::AnnotatedSentence& openfoam = by_id(test, "e09");
    CHECK(relations::necessary_baseline(openfoam, matrix).empty());
  }
  SUBCASE("subset of heuristic when the unique candidate exists") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 40; ++round) {
      sm::AnnotatedSentence s = random_sentence(rng);
      auto necessary = relations::necessary_baseline(s, matrix);
      auto heuristic = relation_set(relations::heuristic_baseline(s, matrix));
      for (const auto& r : necessary)
        CHECK(heuristic.count({r.subject, r.relation, r.object}));
    }
  }
}
