#pragma once

// Renders the three prompt formats (template version "v1") and parses model
// responses back into structured predictions. Rendering is a pure function
// of its inputs and byte-stable across runs.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "softmention/align.hpp"
#include "softmention/corpus.hpp"
#include "softmention/relations.hpp"

namespace softmention::prompts {

inline constexpr std::string_view kDefaultVersion = "v1";

struct PromptText {
  std::string text;
  int fewshot_count = 0;
  int subtask = 1;
  std::string version;
};

// Subtask 1: closed NER with intention classification.
PromptText build_ner_prompt(const std::string& test_sentence,
                            const std::vector<const AnnotatedSentence*>& examples,
                            std::string_view version = kDefaultVersion);

// Subtask 2: attributive NER; known software entities are part of the input.
PromptText build_attr_prompt(const std::string& test_sentence,
                             const std::vector<Mention>& known_software,
                             const std::vector<const AnnotatedSentence*>& examples,
                             std::string_view version = kDefaultVersion);

// Subtask 3: single-choice QA over relation claims.
struct ScqaFewshot {
  const AnnotatedSentence* sentence = nullptr;
  std::vector<relations::Question> questions;
  std::vector<std::vector<bool>> answers;  // parallel to questions/claims
};

struct ScqaPrompt {
  PromptText prompt;
  // Global claim index per test question/claim, parallel to the input
  // questions. Indices run over the whole prompt starting at 0 with the
  // first few-shot claim.
  std::vector<std::vector<size_t>> test_claim_indices;
  std::set<size_t> expected_indices;
};

ScqaPrompt build_scqa_prompt(const std::string& test_sentence,
                             const std::vector<relations::Question>& test_questions,
                             const std::vector<ScqaFewshot>& fewshot,
                             std::string_view version = kDefaultVersion);

// Gold-block renderers shared by the builders, the scripted gold transport
// and the render/parse duality tests.
std::string render_entities_with_intention(const std::vector<Mention>& mentions);
std::string render_plain_mentions(const std::vector<Mention>& mentions);
std::string render_scqa_answer_lines(size_t first_index,
                                     const std::vector<std::vector<bool>>& answers);

enum class NerParseMode { EntitiesWithIntention, Attributes };

struct RejectedItem {
  std::string item;
  std::string reason;
};

struct ParsedNerResponse {
  std::vector<align::GeneratedMention> items;
  std::vector<RejectedItem> rejected;
};

// Extracts the first well-formed JSON array of objects from the raw model
// output, tolerating prose and code fences around it. Items with unknown
// labels (or, for subtask 1, a missing intention) are rejected per item.
// Throws a Parse error when no array is found.
ParsedNerResponse parse_ner_response(const std::string& raw, NerParseMode mode,
                                     const LabelConfig& config = {});

struct ParsedScQaResponse {
  std::map<size_t, bool> answers;
  std::set<size_t> missing;
  std::set<size_t> surplus;
};

// Parses `idx_<n>: True|False` lines case-insensitively. Answers are
// restricted to the expected indices; surplus indices are kept aside and
// missing ones reported. Throws a Parse error when nothing parses.
ParsedScQaResponse parse_scqa_response(const std::string& raw,
                                       const std::set<size_t>& expected);

}  // namespace softmention::prompts
