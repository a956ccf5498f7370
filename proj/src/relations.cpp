#include "softmention/relations.hpp"

#include <algorithm>

namespace softmention::relations {

namespace {

std::vector<MentionHandle> all_mentions(const AnnotatedSentence& s) {
  std::vector<MentionHandle> handles;
  handles.reserve(s.software.size() + s.attributes.size());
  for (size_t i = 0; i < s.software.size(); ++i)
    handles.push_back({s.software[i], {MentionList::Software, i}});
  for (size_t i = 0; i < s.attributes.size(); ++i)
    handles.push_back({s.attributes[i], {MentionList::Attributes, i}});
  return handles;
}

bool handle_before(const MentionHandle& a, const MentionHandle& b) {
  if (a.mention.span.start != b.mention.span.start)
    return a.mention.span.start < b.mention.span.start;
  if (a.mention.span.end != b.mention.span.end)
    return a.mention.span.end < b.mention.span.end;
  return a.ref < b.ref;
}

std::vector<RelationType> subject_relations(const Label& label) {
  if (is_attribute(label))
    return {canonical_relation(std::get<AttributeLabel>(label))};
  return entity_subject_relations(std::get<EntityLabel>(label));
}

// Nearest admissible software mention, left side first.
std::optional<MentionHandle> attach_nearest(const AnnotatedSentence& s,
                                            const MentionHandle& subject,
                                            RelationType relation,
                                            const SignatureMatrix& matrix) {
  std::optional<MentionHandle> best_left, best_right;
  for (size_t i = 0; i < s.software.size(); ++i) {
    MentionHandle object{s.software[i], {MentionList::Software, i}};
    if (object.ref == subject.ref) continue;
    if (!matrix.admissible(subject.mention.label, relation,
                           object.mention.label))
      continue;
    const Span& o = object.mention.span;
    const Span& a = subject.mention.span;
    if (o.end <= a.start) {
      if (!best_left || o.end > best_left->mention.span.end)
        best_left = object;
    } else if (o.start >= a.end) {
      if (!best_right || o.start < best_right->mention.span.start)
        best_right = object;
    }
  }
  if (best_left) return best_left;
  return best_right;
}

Relation make_relation(const MentionHandle& subject, RelationType relation,
                       const MentionHandle& object,
                       const std::string& provenance) {
  Relation r;
  r.subject = subject.ref;
  r.relation = relation;
  r.object = object.ref;
  r.provenance = provenance;
  return r;
}

}  // namespace

std::string Claim::statement() const {
  return "'" + subject.mention.surface + "' is " +
         std::string(relation_phrase(relation)) + " '" +
         object.mention.surface + "'.";
}

std::vector<Question> enumerate_claims(const AnnotatedSentence& sentence,
                                       const SignatureMatrix& matrix) {
  std::vector<MentionHandle> handles = all_mentions(sentence);
  std::vector<MentionHandle> subjects = handles;
  std::sort(subjects.begin(), subjects.end(), handle_before);

  std::vector<Question> questions;
  for (const MentionHandle& subject : subjects) {
    for (RelationType relation : subject_relations(subject.mention.label)) {
      Question q;
      q.subject = subject;
      q.relation = relation;
      for (const MentionHandle& object : handles) {
        if (object.ref == subject.ref) continue;
        if (!matrix.admissible(subject.mention.label, relation,
                               object.mention.label))
          continue;
        q.claims.push_back({subject, relation, object});
      }
      if (q.claims.empty()) continue;
      std::sort(q.claims.begin(), q.claims.end(),
                [](const Claim& a, const Claim& b) {
                  return handle_before(a.object, b.object);
                });
      questions.push_back(std::move(q));
    }
  }
  return questions;
}

std::vector<Relation> decide_relations(
    const AnnotatedSentence& sentence,
    const std::vector<AnsweredQuestion>& answered, bool heuristic_fallback,
    const SignatureMatrix& matrix) {
  std::vector<Relation> out;
  for (const AnsweredQuestion& aq : answered) {
    const Question& q = aq.question;
    std::vector<const Claim*> trues;
    for (size_t i = 0; i < q.claims.size(); ++i) {
      if (i < aq.answers.size() && aq.answers[i].value_or(false))
        trues.push_back(&q.claims[i]);
    }
    if (trues.size() == 1) {
      out.push_back(make_relation(q.subject, q.relation, trues[0]->object, "qa"));
      continue;
    }
    if (trues.size() > 1) {
      // Mirror the baseline rule: nearest object on the left wins, otherwise
      // nearest on the right.
      const Claim* best_left = nullptr;
      const Claim* best_right = nullptr;
      const Span& a = q.subject.mention.span;
      for (const Claim* c : trues) {
        const Span& o = c->object.mention.span;
        if (o.start < a.start) {
          if (!best_left || o.end > best_left->object.mention.span.end)
            best_left = c;
        } else {
          if (!best_right || o.start < best_right->object.mention.span.start)
            best_right = c;
        }
      }
      const Claim* pick = best_left ? best_left : best_right;
      out.push_back(make_relation(q.subject, q.relation, pick->object, "qa"));
      continue;
    }
    // No claim answered true (or answers missing).
    if (heuristic_fallback && is_attribute(q.subject.mention.label)) {
      auto object = attach_nearest(sentence, q.subject, q.relation, matrix);
      if (object)
        out.push_back(
            make_relation(q.subject, q.relation, *object, "heuristic_fallback"));
    }
  }
  return out;
}

std::vector<Relation> heuristic_baseline(const AnnotatedSentence& sentence,
                                         const SignatureMatrix& matrix) {
  std::vector<Relation> out;
  for (size_t i = 0; i < sentence.attributes.size(); ++i) {
    MentionHandle subject{sentence.attributes[i], {MentionList::Attributes, i}};
    if (!is_attribute(subject.mention.label)) continue;
    RelationType relation =
        canonical_relation(std::get<AttributeLabel>(subject.mention.label));
    if (relation == RelationType::PlugIn_of ||
        relation == RelationType::Specification_of)
      continue;
    auto object = attach_nearest(sentence, subject, relation, matrix);
    if (object)
      out.push_back(make_relation(subject, relation, *object, "heuristic"));
  }
  return out;
}

std::vector<Relation> necessary_baseline(const AnnotatedSentence& sentence,
                                         const SignatureMatrix& matrix) {
  std::vector<Relation> out;
  for (size_t i = 0; i < sentence.attributes.size(); ++i) {
    MentionHandle subject{sentence.attributes[i], {MentionList::Attributes, i}};
    if (!is_attribute(subject.mention.label)) continue;
    RelationType relation =
        canonical_relation(std::get<AttributeLabel>(subject.mention.label));
    if (relation == RelationType::PlugIn_of ||
        relation == RelationType::Specification_of)
      continue;
    std::optional<MentionHandle> only;
    size_t admissible = 0;
    for (size_t k = 0; k < sentence.software.size(); ++k) {
      MentionHandle object{sentence.software[k], {MentionList::Software, k}};
      if (matrix.admissible(subject.mention.label, relation,
                            object.mention.label)) {
        ++admissible;
        only = object;
      }
    }
    if (admissible == 1)
      out.push_back(make_relation(subject, relation, *only, "necessary"));
  }
  return out;
}

bool gold_has_triple(const AnnotatedSentence& sentence, const Claim& claim) {
  return std::any_of(sentence.relations.begin(), sentence.relations.end(),
                     [&](const Relation& r) {
                       return r.subject == claim.subject.ref &&
                              r.relation == claim.relation &&
                              r.object == claim.object.ref;
                     });
}

std::vector<std::vector<bool>> gold_answers(
    const AnnotatedSentence& sentence, const std::vector<Question>& questions) {
  std::vector<std::vector<bool>> answers;
  answers.reserve(questions.size());
  for (const Question& q : questions) {
    std::vector<bool> row;
    row.reserve(q.claims.size());
    for (const Claim& c : q.claims) row.push_back(gold_has_triple(sentence, c));
    answers.push_back(std::move(row));
  }
  return answers;
}

}  // namespace softmention::relations
