#pragma once

// Corpus model and JSONL I/O. One sentence per line; character offsets count
// Unicode code points. All values are immutable after load.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "softmention/labels.hpp"

namespace softmention {

struct Span {
  size_t start = 0;
  size_t end = 0;  // exclusive

  size_t length() const { return end - start; }
  bool overlaps(const Span& other) const {
    return start < other.end && other.start < end;
  }
  auto operator<=>(const Span&) const = default;
};

struct Mention {
  std::string surface;
  Label label;
  std::optional<IntentionLabel> intention;
  Span span;

  bool operator==(const Mention&) const = default;
};

enum class MentionList { Software, Attributes };

struct MentionRef {
  MentionList list = MentionList::Software;
  size_t idx = 0;

  auto operator<=>(const MentionRef&) const = default;
};

struct Relation {
  MentionRef subject;
  RelationType relation = RelationType::Version_of;
  MentionRef object;
  std::optional<std::string> provenance;  // qa | heuristic_fallback | necessary

  bool same_triple(const Relation& other) const {
    return subject == other.subject && relation == other.relation &&
           object == other.object;
  }
};

struct AnnotatedSentence {
  std::string id;
  std::string doc_id;
  std::string text;
  std::vector<Mention> software;
  std::vector<Mention> attributes;
  std::vector<Relation> relations;

  const Mention& mention(const MentionRef& ref) const {
    return ref.list == MentionList::Software ? software.at(ref.idx)
                                             : attributes.at(ref.idx);
  }
};

using Corpus = std::vector<AnnotatedSentence>;

struct LabelConfig {
  // When set, SoftwareCoreference is also accepted in attribute lists.
  bool coreference_as_attribute = false;
};

// Strict loading rejects any invariant violation with a line-numbered error.
// Lenient loading (strict = false) accepts structurally parseable records and
// leaves span/duplicate violations to validate_corpus, which reports them.
Corpus load_corpus(const std::filesystem::path& path,
                   const LabelConfig& config = {}, bool strict = true);
Corpus parse_corpus(std::istream& in, const std::string& source_name,
                    const LabelConfig& config = {}, bool strict = true);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string serialize_sentence(const AnnotatedSentence& sentence);

struct ValidationIssue {
  std::string sentence_id;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
};

ValidationReport validate_corpus(const Corpus& corpus);

// One admissible (subject label, relation, object label) combination.
struct Signature {
  Label subject;
  RelationType relation;
  Label object;

  bool operator==(const Signature&) const = default;
  bool operator<(const Signature& other) const {
    if (label_rank(subject) != label_rank(other.subject))
      return label_rank(subject) < label_rank(other.subject);
    if (relation != other.relation) return relation < other.relation;
    return label_rank(object) < label_rank(other.object);
  }
};

class SignatureMatrix {
 public:
  void add(const Signature& signature, int count = 1);
  bool admissible(const Label& subject, RelationType relation,
                  const Label& object) const;
  int count(const Signature& signature) const;
  size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  const std::map<Signature, int>& entries() const { return counts_; }

 private:
  std::map<Signature, int> counts_;
};

// The static domain/range grid for all eleven relation types.
const SignatureMatrix& static_signature_grid();

SignatureMatrix mine_signatures(const Corpus& train,
                                bool seed_with_static_table);

}  // namespace softmention
