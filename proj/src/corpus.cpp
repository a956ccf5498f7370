#include "softmention/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "softmention/error.hpp"
#include "softmention/utf8.hpp"

namespace softmention {

namespace {

using nlohmann::json;

[[noreturn]] void data_error(const std::string& source, size_t line,
                             const std::string& message) {
  raise(ErrorKind::Data,
        source + ":" + std::to_string(line) + ": " + message);
}

Mention parse_mention(const json& j, MentionList list,
                      const LabelConfig& config, const std::string& source,
                      size_t line) {
  if (!j.is_object()) data_error(source, line, "mention must be an object");
  for (const char* field : {"surface", "label", "start", "end"}) {
    if (!j.contains(field))
      data_error(source, line, std::string("mention missing field '") + field + "'");
  }
  Mention m;
  m.surface = j.at("surface").get<std::string>();
  std::string label_str = j.at("label").get<std::string>();
  if (list == MentionList::Software) {
    auto label = parse_entity_label(label_str);
    if (!label)
      data_error(source, line, "unknown entity label '" + label_str + "'");
    m.label = *label;
    if (!j.contains("intention"))
      data_error(source, line,
                 "software mention '" + m.surface + "' missing intention");
    std::string intent_str = j.at("intention").get<std::string>();
    auto intent = parse_intention_label(intent_str);
    if (!intent)
      data_error(source, line, "unknown intention '" + intent_str + "'");
    m.intention = *intent;
  } else {
    if (auto attr = parse_attribute_label(label_str)) {
      m.label = *attr;
    } else if (config.coreference_as_attribute &&
               label_str == "SoftwareCoreference") {
      m.label = EntityLabel::SoftwareCoreference;
    } else {
      data_error(source, line, "unknown attribute label '" + label_str + "'");
    }
    if (j.contains("intention"))
      data_error(source, line,
                 "attribute mention '" + m.surface + "' carries an intention");
  }
  m.span.start = j.at("start").get<size_t>();
  m.span.end = j.at("end").get<size_t>();
  return m;
}

json mention_to_json(const Mention& m) {
  json j;
  j["surface"] = m.surface;
  j["label"] = label_name(m.label);
  if (m.intention) j["intention"] = std::string(to_string(*m.intention));
  j["start"] = m.span.start;
  j["end"] = m.span.end;
  return j;
}

MentionList parse_list_name(const std::string& name, const std::string& source,
                            size_t line) {
  if (name == "software") return MentionList::Software;
  if (name == "attributes") return MentionList::Attributes;
  data_error(source, line, "unknown mention list '" + name + "'");
}

std::string list_name(MentionList list) {
  return list == MentionList::Software ? "software" : "attributes";
}

void check_sentence(const AnnotatedSentence& s, const std::string& source,
                    size_t line) {
  utf8::Decoded d = utf8::decode(s.text);
  auto check_list = [&](const std::vector<Mention>& mentions) {
    for (const Mention& m : mentions) {
      if (m.surface.empty())
        data_error(source, line, "empty mention surface");
      if (m.span.start >= m.span.end || m.span.end > d.size())
        data_error(source, line,
                   "mention '" + m.surface + "' span [" +
                       std::to_string(m.span.start) + ", " +
                       std::to_string(m.span.end) +
                       ") out of range for text of length " +
                       std::to_string(d.size()));
      std::string sliced = utf8::slice(d, s.text, m.span.start, m.span.end);
      if (utf8::normalize_for_match(sliced) !=
          utf8::normalize_for_match(m.surface))
        data_error(source, line,
                   "mention surface '" + m.surface +
                       "' does not match text at its span ('" + sliced + "')");
    }
  };
  check_list(s.software);
  check_list(s.attributes);

  std::set<std::tuple<MentionRef, RelationType, MentionRef>> seen;
  for (const Relation& r : s.relations) {
    auto in_range = [&](const MentionRef& ref) {
      size_t n = ref.list == MentionList::Software ? s.software.size()
                                                   : s.attributes.size();
      return ref.idx < n;
    };
    if (!in_range(r.subject) || !in_range(r.object))
      data_error(source, line,
                 "relation references mention index out of range");
    auto key = std::make_tuple(r.subject, r.relation, r.object);
    if (!seen.insert(key).second)
      data_error(source, line,
                 "duplicate relation triple (" +
                     std::string(to_string(r.relation)) + ")");
  }
}

AnnotatedSentence parse_sentence(const std::string& record,
                                 const LabelConfig& config,
                                 const std::string& source, size_t line,
                                 bool strict) {
  json j = json::parse(record, nullptr, false);
  if (j.is_discarded())
    data_error(source, line, "record is not valid JSON");
  if (!j.is_object()) data_error(source, line, "record must be an object");
  for (const char* field : {"id", "text"}) {
    if (!j.contains(field))
      data_error(source, line, std::string("record missing field '") + field + "'");
  }
  AnnotatedSentence s;
  s.id = j.at("id").get<std::string>();
  s.doc_id = j.value("doc_id", std::string());
  s.text = j.at("text").get<std::string>();
  if (s.id.empty()) data_error(source, line, "empty sentence id");
  for (const json& m : j.value("software", json::array()))
    s.software.push_back(
        parse_mention(m, MentionList::Software, config, source, line));
  for (const json& m : j.value("attributes", json::array()))
    s.attributes.push_back(
        parse_mention(m, MentionList::Attributes, config, source, line));
  for (const json& r : j.value("relations", json::array())) {
    Relation rel;
    rel.subject.list = parse_list_name(
        r.at("subject_list").get<std::string>(), source, line);
    rel.subject.idx = r.at("subject_idx").get<size_t>();
    std::string rel_str = r.at("relation").get<std::string>();
    auto relation = parse_relation_type(rel_str);
    if (!relation)
      data_error(source, line, "unknown relation type '" + rel_str + "'");
    rel.relation = *relation;
    rel.object.list =
        parse_list_name(r.at("object_list").get<std::string>(), source, line);
    rel.object.idx = r.at("object_idx").get<size_t>();
    if (r.contains("provenance"))
      rel.provenance = r.at("provenance").get<std::string>();
    s.relations.push_back(std::move(rel));
  }
  if (strict) check_sentence(s, source, line);
  return s;
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source_name,
                    const LabelConfig& config, bool strict) {
  Corpus corpus;
  std::set<std::string> ids;
  std::string record;
  size_t line = 0;
  while (std::getline(in, record)) {
    ++line;
    if (record.empty()) continue;
    AnnotatedSentence s =
        parse_sentence(record, config, source_name, line, strict);
    if (!ids.insert(s.id).second && strict)
      data_error(source_name, line, "duplicate sentence id '" + s.id + "'");
    corpus.push_back(std::move(s));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path,
                   const LabelConfig& config, bool strict) {
  std::ifstream in(path);
  if (!in)
    raise(ErrorKind::Data, "cannot open corpus file " + path.string());
  return parse_corpus(in, path.string(), config, strict);
}

std::string serialize_sentence(const AnnotatedSentence& s) {
  json j;
  j["id"] = s.id;
  j["doc_id"] = s.doc_id;
  j["text"] = s.text;
  j["software"] = json::array();
  for (const Mention& m : s.software) j["software"].push_back(mention_to_json(m));
  j["attributes"] = json::array();
  for (const Mention& m : s.attributes)
    j["attributes"].push_back(mention_to_json(m));
  j["relations"] = json::array();
  for (const Relation& r : s.relations) {
    json rel;
    rel["subject_list"] = list_name(r.subject.list);
    rel["subject_idx"] = r.subject.idx;
    rel["relation"] = std::string(to_string(r.relation));
    rel["object_list"] = list_name(r.object.list);
    rel["object_idx"] = r.object.idx;
    if (r.provenance) rel["provenance"] = *r.provenance;
    j["relations"].push_back(rel);
  }
  return j.dump();
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    raise(ErrorKind::Data, "cannot write corpus file " + path.string());
  for (const AnnotatedSentence& s : corpus) out << serialize_sentence(s) << "\n";
}

ValidationReport validate_corpus(const Corpus& corpus) {
  ValidationReport report;
  std::set<std::string> ids;
  for (const AnnotatedSentence& s : corpus) {
    auto issue = [&](const std::string& message) {
      report.issues.push_back({s.id, message});
    };
    if (!ids.insert(s.id).second) issue("duplicate sentence id");
    utf8::Decoded d = utf8::decode(s.text);
    auto check_list = [&](const std::vector<Mention>& mentions,
                          MentionList list) {
      for (size_t i = 0; i < mentions.size(); ++i) {
        const Mention& m = mentions[i];
        std::string where =
            list_name(list) + "[" + std::to_string(i) + "] '" + m.surface + "'";
        if (m.span.start >= m.span.end || m.span.end > d.size()) {
          issue(where + ": span out of range");
          continue;
        }
        std::string sliced = utf8::slice(d, s.text, m.span.start, m.span.end);
        if (utf8::normalize_for_match(sliced) !=
            utf8::normalize_for_match(m.surface))
          issue(where + ": surface does not match text at span");
        bool entity = is_entity(m.label);
        if (list == MentionList::Software && !entity)
          issue(where + ": software mention with attribute label");
        if (entity && list == MentionList::Software && !m.intention)
          issue(where + ": software mention without intention");
        if (list == MentionList::Attributes && m.intention)
          issue(where + ": attribute mention with intention");
      }
    };
    check_list(s.software, MentionList::Software);
    check_list(s.attributes, MentionList::Attributes);
    std::set<std::tuple<MentionRef, RelationType, MentionRef>> seen;
    for (const Relation& r : s.relations) {
      auto in_range = [&](const MentionRef& ref) {
        size_t n = ref.list == MentionList::Software ? s.software.size()
                                                     : s.attributes.size();
        return ref.idx < n;
      };
      if (!in_range(r.subject) || !in_range(r.object)) {
        issue("relation endpoint out of range");
        continue;
      }
      if (!seen.insert({r.subject, r.relation, r.object}).second)
        issue("duplicate relation triple");
    }
  }
  return report;
}

void SignatureMatrix::add(const Signature& signature, int count) {
  counts_[signature] += count;
}

bool SignatureMatrix::admissible(const Label& subject, RelationType relation,
                                 const Label& object) const {
  return counts_.find({subject, relation, object}) != counts_.end();
}

int SignatureMatrix::count(const Signature& signature) const {
  auto it = counts_.find(signature);
  return it == counts_.end() ? 0 : it->second;
}

const SignatureMatrix& static_signature_grid() {
  static const SignatureMatrix grid = [] {
    SignatureMatrix m;
    using E = EntityLabel;
    using A = AttributeLabel;
    const Label app = E::Application;
    const Label os = E::OperatingSystem;
    const Label plug = E::PlugIn;
    const Label penv = E::ProgrammingEnvironment;
    auto row = [&](Label subject, RelationType rel,
                   std::initializer_list<Label> objects) {
      for (const Label& object : objects) m.add({subject, rel, object}, 0);
    };
    row(A::Abbreviation, RelationType::Abbreviation_of, {app, os, plug, penv});
    row(A::Developer, RelationType::Developer_of, {app, os, plug, penv});
    row(A::Release, RelationType::Release_of, {app, os, plug, penv});
    row(A::Version, RelationType::Version_of, {app, os, plug, penv});
    row(A::Citation, RelationType::Citation_of, {app, plug, penv});
    row(plug, RelationType::PlugIn_of, {app, plug, penv});
    row(A::URL, RelationType::URL_of, {app, plug, penv});
    row(A::Extension, RelationType::Extension_of, {app, os});
    row(A::License, RelationType::License_of, {app, plug});
    row(A::AlternativeName, RelationType::AlternativeName_of, {app});
    // Inner software relations.
    row(app, RelationType::PlugIn_of, {app});
    row(app, RelationType::Specification_of, {app});
    row(penv, RelationType::Specification_of, {penv});
    return m;
  }();
  return grid;
}

SignatureMatrix mine_signatures(const Corpus& train,
                                bool seed_with_static_table) {
  SignatureMatrix m;
  if (seed_with_static_table) {
    for (const auto& [signature, count] : static_signature_grid().entries())
      m.add(signature, count);
  }
  for (const AnnotatedSentence& s : train) {
    for (const Relation& r : s.relations) {
      m.add({s.mention(r.subject).label, r.relation, s.mention(r.object).label},
            1);
    }
  }
  return m;
}

}  // namespace softmention
