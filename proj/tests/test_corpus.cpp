#include <sstream>

#include "doctest.h"
#include "softmention/corpus.hpp"
#include "softmention/error.hpp"
#include "test_util.hpp"

namespace sm = softmention;

namespace {

sm::Corpus load_fixture(const std::string& name) {
  return sm::load_corpus(testutil::fixture(name));
}

// Synthetic sentence with one mention per requested label pair and a relation
// between them; used for matrix property tests.
sm::AnnotatedSentence make_pair_sentence(const std::string& id,
                                         sm::Label subject_label,
                                         sm::RelationType relation,
                                         sm::Label object_label) {
  sm::AnnotatedSentence s;
  s.id = id;
  s.doc_id = "doc";
  s.text = "aa bb";
  sm::Mention subject{"aa", subject_label, std::nullopt, {0, 2}};
  sm::Mention object{"bb", object_label, std::nullopt, {3, 5}};
  auto place = [&](sm::Mention m) {
    if (sm::is_entity(m.label)) {
      m.intention = sm::IntentionLabel::Usage;
      s.software.push_back(m);
      return sm::MentionRef{sm::MentionList::Software, s.software.size() - 1};
    }
    s.attributes.push_back(m);
    return sm::MentionRef{sm::MentionList::Attributes, s.attributes.size() - 1};
  };
  sm::Relation r;
  r.subject = place(subject);
  r.relation = relation;
  r.object = place(object);
  s.relations.push_back(r);
  return s;
}

}  // namespace

TEST_CASE("load_corpus parses the fixture corpora") {
  sm::Corpus train = load_fixture("train.jsonl");
  sm::Corpus test = load_fixture("test.jsonl");
  CHECK(train.size() == 16);
  CHECK(test.size() == 20);

  // the record with license, version, and url attributes
  const sm::AnnotatedSentence& aspasia = train[3];
  CHECK(aspasia.id == "t04");
  REQUIRE(aspasia.software.size() == 1);
  CHECK(aspasia.software[0].surface == "ASPASIA");
  CHECK(std::get<sm::EntityLabel>(aspasia.software[0].label) ==
        sm::EntityLabel::Application);
  REQUIRE(aspasia.attributes.size() == 3);
  CHECK(std::get<sm::AttributeLabel>(aspasia.attributes[0].label) ==
        sm::AttributeLabel::License);
  CHECK(aspasia.attributes[1].surface == "2.0");
  CHECK(aspasia.relations.size() == 3);

  // file order is preserved
  CHECK(train.front().id == "t01");
  CHECK(train.back().id == "t16");
}

TEST_CASE("load_corpus: empty input yields an empty corpus") {
  std::istringstream in("");
  CHECK(sm::parse_corpus(in, "mem").empty());
}

TEST_CASE("load_corpus rejects bad records with line numbers") {
  auto parse_one = [](const std::string& line) {
    std::istringstream in(line);
    return sm::parse_corpus(in, "mem");
  };

  SUBCASE("relation index out of range") {
    std::string record = R"({"id":"x","text":"A B","software":[{"surface":"A","label":"Application","intention":"Usage","start":0,"end":1}],"attributes":[],"relations":[{"subject_list":"software","subject_idx":99,"relation":"Version_of","object_list":"software","object_idx":0}]})";
    CHECK_THROWS_WITH_AS(parse_one(record),
                         doctest::Contains("mem:1"), sm::Error);
  }
  SUBCASE("unknown label is named in the error") {
    std::string record = R"({"id":"x","text":"A","software":[{"surface":"A","label":"Gadget","intention":"Usage","start":0,"end":1}]})";
    CHECK_THROWS_WITH_AS(parse_one(record), doctest::Contains("Gadget"),
                         sm::Error);
  }
  SUBCASE("span out of range") {
    std::string record = R"({"id":"x","text":"A","software":[{"surface":"A","label":"Application","intention":"Usage","start":0,"end":9}]})";
    CHECK_THROWS_AS(parse_one(record), sm::Error);
  }
  SUBCASE("surface mismatch") {
    std::string record = R"({"id":"x","text":"ABC","software":[{"surface":"ZZ","label":"Application","intention":"Usage","start":0,"end":2}]})";
    CHECK_THROWS_AS(parse_one(record), sm::Error);
  }
  SUBCASE("duplicate relation triple") {
    std::string record = R"({"id":"x","text":"A B","software":[{"surface":"A","label":"Application","intention":"Usage","start":0,"end":1}],"attributes":[{"surface":"B","label":"Version","start":2,"end":3}],"relations":[{"subject_list":"attributes","subject_idx":0,"relation":"Version_of","object_list":"software","object_idx":0},{"subject_list":"attributes","subject_idx":0,"relation":"Version_of","object_list":"software","object_idx":0}]})";
    CHECK_THROWS_AS(parse_one(record), sm::Error);
  }
}

TEST_CASE("entity label alias canonicalizes") {
  CHECK(sm::parse_entity_label("SoftwarePackageOrPlugin") ==
        sm::EntityLabel::PlugIn);
  CHECK(sm::parse_entity_label("PlugIn") == sm::EntityLabel::PlugIn);
  CHECK_FALSE(sm::parse_entity_label("Plugin").has_value());
}

TEST_CASE("round-trip: serialize then re-parse is structurally equal") {
  for (const char* name : {"train.jsonl", "test.jsonl"}) {
    sm::Corpus corpus = load_fixture(name);
    std::ostringstream out;
    for (const auto& s : corpus) out << sm::serialize_sentence(s) << "\n";
    std::istringstream in(out.str());
    sm::Corpus reparsed = sm::parse_corpus(in, "mem");
    REQUIRE(reparsed.size() == corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
      CHECK(reparsed[i].id == corpus[i].id);
      CHECK(reparsed[i].text == corpus[i].text);
      CHECK(reparsed[i].software == corpus[i].software);
      CHECK(reparsed[i].attributes == corpus[i].attributes);
      REQUIRE(reparsed[i].relations.size() == corpus[i].relations.size());
      for (size_t k = 0; k < corpus[i].relations.size(); ++k)
        CHECK(reparsed[i].relations[k].same_triple(corpus[i].relations[k]));
    }
  }
}

TEST_CASE("validate_corpus reports violations without throwing") {
  sm::Corpus corpus = load_fixture("train.jsonl");
  CHECK(sm::validate_corpus(corpus).ok());

  SUBCASE("span past end of text") {
    corpus[0].software[0].span.end = 9999;
    auto report = sm::validate_corpus(corpus);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].sentence_id == "t01");
  }
  SUBCASE("duplicated relation triple") {
    corpus[2].relations.push_back(corpus[2].relations.front());
    auto report = sm::validate_corpus(corpus);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].message == "duplicate relation triple");
  }
}

TEST_CASE("static signature grid matches the domain/range table") {
  const sm::SignatureMatrix& grid = sm::static_signature_grid();
  using E = sm::EntityLabel;
  using A = sm::AttributeLabel;
  CHECK(grid.size() == 33);
  CHECK(grid.admissible(A::Citation, sm::RelationType::Citation_of,
                        E::Application));
  CHECK_FALSE(grid.admissible(A::Citation, sm::RelationType::Citation_of,
                              E::OperatingSystem));
  CHECK(grid.admissible(A::Version, sm::RelationType::Version_of,
                        E::OperatingSystem));
  CHECK(grid.admissible(E::PlugIn, sm::RelationType::PlugIn_of, E::Application));
  CHECK_FALSE(grid.admissible(E::PlugIn, sm::RelationType::PlugIn_of,
                              E::OperatingSystem));
  CHECK(grid.admissible(E::Application, sm::RelationType::Specification_of,
                        E::Application));
  CHECK(grid.admissible(E::ProgrammingEnvironment,
                        sm::RelationType::Specification_of,
                        E::ProgrammingEnvironment));
  CHECK_FALSE(grid.admissible(A::AlternativeName,
                              sm::RelationType::AlternativeName_of, E::PlugIn));
}

TEST_CASE("mine_signatures: observed triples become admissible") {
  sm::Corpus train = load_fixture("train.jsonl");
  sm::SignatureMatrix mined = sm::mine_signatures(train, false);

  // version attached to a license, beyond the static grid
  CHECK(mined.admissible(sm::AttributeLabel::Version,
                         sm::RelationType::Version_of,
                         sm::AttributeLabel::License));
  CHECK(mined.count({sm::AttributeLabel::Version, sm::RelationType::Version_of,
                     sm::AttributeLabel::License}) == 2);
  CHECK_FALSE(mined.admissible(sm::EntityLabel::Application,
                               sm::RelationType::PlugIn_of,
                               sm::EntityLabel::Application));

  SUBCASE("empty train, no seeding") {
    CHECK(sm::mine_signatures({}, false).empty());
  }
  SUBCASE("sentences without relations contribute nothing") {
    sm::Corpus no_relations{train[0], train[1]};
    CHECK(sm::mine_signatures(no_relations, false).empty());
  }
  SUBCASE("seeding unions the static grid") {
    sm::SignatureMatrix seeded = sm::mine_signatures({}, true);
    CHECK(seeded.size() == sm::static_signature_grid().size());
    CHECK(seeded.admissible(sm::AttributeLabel::Citation,
                            sm::RelationType::Citation_of,
                            sm::EntityLabel::Application));
    CHECK_FALSE(seeded.admissible(sm::AttributeLabel::Citation,
                                  sm::RelationType::Citation_of,
                                  sm::EntityLabel::OperatingSystem));
  }
}

TEST_CASE("mine_signatures is monotone in the training data") {
  sm::Corpus train = load_fixture("train.jsonl");
  for (size_t cut = 0; cut + 1 < train.size(); cut += 3) {
    sm::Corpus smaller(train.begin(), train.begin() + cut);
    sm::Corpus larger(train.begin(), train.begin() + cut + 1);
    sm::SignatureMatrix a = sm::mine_signatures(smaller, false);
    sm::SignatureMatrix b = sm::mine_signatures(larger, false);
    for (const auto& [signature, count] : a.entries()) {
      CHECK(b.admissible(signature.subject, signature.relation,
                         signature.object));
    }
  }
}

TEST_CASE("static seed is a fixed point under mining") {
  sm::Corpus synthetic;
  int i = 0;
  for (const auto& [signature, count] : sm::static_signature_grid().entries()) {
    synthetic.push_back(make_pair_sentence("g" + std::to_string(i++),
                                           signature.subject,
                                           signature.relation,
                                           signature.object));
  }
  sm::SignatureMatrix mined = sm::mine_signatures(synthetic, true);
  CHECK(mined.entries().size() == sm::static_signature_grid().entries().size());
  for (const auto& [signature, count] : mined.entries()) {
    CHECK(sm::static_signature_grid().admissible(
        signature.subject, signature.relation, signature.object));
    CHECK(count == 1);  // each seeded signature observed exactly once
  }
}

TEST_CASE("lenient parsing defers invariant violations to validation") {
  std::string record = R"({"id":"x","text":"A","software":[{"surface":"A","label":"Application","intention":"Usage","start":0,"end":9}]})";
  std::istringstream strict_in(record);
  CHECK_THROWS_AS(sm::parse_corpus(strict_in, "mem"), sm::Error);

  std::istringstream lenient_in(record);
  sm::Corpus corpus = sm::parse_corpus(lenient_in, "mem", {}, false);
  REQUIRE(corpus.size() == 1);
  auto report = sm::validate_corpus(corpus);
  REQUIRE(report.issues.size() == 1);
  CHECK(report.issues[0].message.find("span out of range") !=
        std::string::npos);
}

TEST_CASE("coreference-as-attribute is config gated") {
  std::string record = R"({"id":"x","text":"it runs","attributes":[{"surface":"it","label":"SoftwareCoreference","start":0,"end":2}]})";
  std::istringstream in1(record);
  CHECK_THROWS_AS(sm::parse_corpus(in1, "mem"), sm::Error);
  std::istringstream in2(record);
  sm::LabelConfig config;
  config.coreference_as_attribute = true;
  sm::Corpus corpus = sm::parse_corpus(in2, "mem", config);
  REQUIRE(corpus.size() == 1);
  CHECK(std::get<sm::EntityLabel>(corpus[0].attributes[0].label) ==
        sm::EntityLabel::SoftwareCoreference);
}
