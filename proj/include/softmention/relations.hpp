#pragma once

// Relation extraction as single-choice question answering: candidate claim
// generation from the signature matrix, answer-based decisions, and the two
// rule-based baselines.

#include <optional>
#include <string>
#include <vector>

#include "softmention/corpus.hpp"

namespace softmention::relations {

// A mention together with its position in the owning sentence's lists.
struct MentionHandle {
  Mention mention;
  MentionRef ref;
};

// One candidate statement "X is the <relation> of Y".
struct Claim {
  MentionHandle subject;
  RelationType relation = RelationType::Version_of;
  MentionHandle object;

  // "'X' is the version of 'Y'." (index prefix is assigned at prompt build)
  std::string statement() const;
};

// All claims for one (subject, relation type) pair.
struct Question {
  MentionHandle subject;
  RelationType relation = RelationType::Version_of;
  std::vector<Claim> claims;
};

// Every mention is paired with every admissible partner under the matrix.
// Attribute mentions ask about their canonical relation; software mentions
// ask about the inner-software relations. Questions are ordered by subject
// span start, claims by object span start.
std::vector<Question> enumerate_claims(const AnnotatedSentence& sentence,
                                       const SignatureMatrix& matrix);

struct AnsweredQuestion {
  Question question;
  std::vector<std::optional<bool>> answers;  // parallel to question.claims
};

struct PredictedRelation {
  Relation relation;  // provenance filled in
};

// Per question: a single true claim wins; several true claims fall back to
// the nearest object with the left side preferred; no true claim applies the
// heuristic rule when enabled, otherwise abstains.
std::vector<Relation> decide_relations(const AnnotatedSentence& sentence,
                                       const std::vector<AnsweredQuestion>& answered,
                                       bool heuristic_fallback,
                                       const SignatureMatrix& matrix);

// Attach each attribute to the nearest admissible software mention on its
// left, falling back to the nearest one on the right; Specification_of and
// PlugIn_of are never emitted.
std::vector<Relation> heuristic_baseline(const AnnotatedSentence& sentence,
                                         const SignatureMatrix& matrix);

// Emit a triple only when exactly one admissible software partner exists.
std::vector<Relation> necessary_baseline(const AnnotatedSentence& sentence,
                                         const SignatureMatrix& matrix);

// Gold truth lookup used to script few-shot answers.
bool gold_has_triple(const AnnotatedSentence& sentence, const Claim& claim);

std::vector<std::vector<bool>> gold_answers(
    const AnnotatedSentence& sentence, const std::vector<Question>& questions);

}  // namespace softmention::relations
