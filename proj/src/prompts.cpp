#include "softmention/prompts.hpp"

#include <regex>

#include <nlohmann/json.hpp>

#include "softmention/error.hpp"

namespace softmention::prompts {

namespace {

using nlohmann::json;

// --- template v1 -----------------------------------------------------------

constexpr std::string_view kNerHeaderV1 =
    "# Task: Exctract entities in a closed NER setting and classify their "
    "intention.\n"
    "## Entity Types (closed setting):\n"
    "The entity types in this closed setting are: ['Application', "
    "'ProgrammingEnvironment', 'SoftwarePackageOrPlugin', 'OperatingSystem', "
    "'SoftwareCoreference']\n"
    "Do not include version information for the entities.\n"
    "if no entity of the given entity types in the context return an empty "
    "list\n"
    "\n"
    "## Intention Classification:\n"
    "For each entity mention classify the intention of the usage in the "
    "context.\n"
    "Use only and exact one intention per entity.\n"
    "The intention classes are: ['Usage', 'Deposition', 'Creation', "
    "'Mention']\n"
    "\n"
    "## The Contexts:\n"
    "The contexts to extract the entities are about software and from "
    "scientific publications.\n"
    "\n"
    "## Output Format:\n"
    "Return the result in a json list of objects.\n"
    "\n"
    "# Examples:\n";

constexpr std::string_view kAttrHeaderV1 =
    "# Task: \n"
    "## Task Description\n"
    "Exctract attributive text spans about software related entities in a "
    "closed attibutive NER setting.\n"
    "\n"
    "## The Contexts:\n"
    "The contexts to extract the attributive text spans are about software "
    "and from scientific publications.\n"
    "\n"
    "## The Software Related Entities:\n"
    "The software related entities are given as a list of json object with "
    "mention and entity type.\n"
    "Do not annotate any related software entities.\n"
    "\n"
    "## Attribute Types (closed setting):\n"
    "The attribute types to identify in this closed setting are:\n"
    " ['Version', 'Developer', 'Citation', 'URL', 'Release', 'Abbreviation', "
    "'License', 'Extension', 'AlternativeName']\n"
    "Keep the \"Version\" note separate, without overlap with other entities "
    "or attribute spans.\n"
    "No span overlaps are allowed inbetween attributive spans of to the given "
    "software related entites.\n"
    "Note that the attribute types must be associated with a software-related "
    "entity of one of the following types:  ['Application', "
    "'ProgrammingEnvironment', 'PlugIn', 'OperatingSystem', "
    "'SoftwareCoreference'].\n"
    "To help you, you will receive all software-related entities as json for "
    "each context.\n"
    "\n"
    "## Output Format:\n"
    "Return the result in a json list of objects.\n"
    "\n"
    "# Examples:\n";

constexpr std::string_view kScqaHeaderV1 =
    "# Answer the following single-choice questions on sentences from "
    "scientific publications on the subject of software.\n"
    " * Please note that there is exactly one answer to each question.\n";

void require_version(std::string_view version) {
  if (version != kDefaultVersion)
    raise(ErrorKind::Config,
          "unknown prompt version '" + std::string(version) + "'");
}

std::string quote(const std::string& s) { return json(s).dump(); }

// The subtask-1 template advertises the PlugIn label as
// "SoftwarePackageOrPlugin"; gold example blocks use the same spelling.
std::string subtask1_label(const Label& label) {
  if (is_entity(label) && std::get<EntityLabel>(label) == EntityLabel::PlugIn)
    return "SoftwarePackageOrPlugin";
  return label_name(label);
}

std::string context_block(const std::string& text) {
  return "## Context:\n\"\"\"" + text + "\"\"\"\n";
}

std::string question_header(const relations::Question& q) {
  return "Which of the statements about the " +
         label_name(q.subject.mention.label) + " '" + q.subject.mention.surface +
         "' is true?\n";
}

std::string question_groups(const std::vector<relations::Question>& questions,
                            size_t& next_index,
                            std::vector<std::vector<size_t>>* indices_out) {
  std::string out;
  for (size_t qi = 0; qi < questions.size(); ++qi) {
    if (qi > 0) out += "\n";
    out += question_header(questions[qi]);
    std::vector<size_t> claim_indices;
    for (const relations::Claim& claim : questions[qi].claims) {
      out += "idx_" + std::to_string(next_index) + ": " + claim.statement() +
             "\n";
      claim_indices.push_back(next_index);
      ++next_index;
    }
    if (indices_out) indices_out->push_back(std::move(claim_indices));
  }
  return out;
}

}  // namespace

std::string render_entities_with_intention(
    const std::vector<Mention>& mentions) {
  if (mentions.empty()) return "[]";
  std::string out = "[   {";
  for (size_t i = 0; i < mentions.size(); ++i) {
    const Mention& m = mentions[i];
    if (i > 0) out += ", {";
    out += "\n\t\t\"text\": " + quote(m.surface) + ",";
    out += "\n\t\t\"label\": " + quote(subtask1_label(m.label)) + ",";
    std::string intention =
        m.intention ? std::string(to_string(*m.intention)) : std::string();
    out += "\n\t\t\"intention\": " + quote(intention) + " }";
  }
  out += " ]";
  return out;
}

std::string render_plain_mentions(const std::vector<Mention>& mentions) {
  if (mentions.empty()) return "[]";
  std::string out = "[{";
  for (size_t i = 0; i < mentions.size(); ++i) {
    const Mention& m = mentions[i];
    if (i > 0) out += "\n }, {";
    out += "\n    \"text\": " + quote(m.surface) + ",";
    out += "\n    \"label\": " + quote(label_name(m.label));
  }
  out += "}]";
  return out;
}

std::string render_scqa_answer_lines(
    size_t first_index, const std::vector<std::vector<bool>>& answers) {
  std::string out;
  size_t index = first_index;
  for (const auto& row : answers) {
    for (bool value : row) {
      out += "idx_" + std::to_string(index) + ": " +
             (value ? "True" : "False") + "\n";
      ++index;
    }
  }
  return out;
}

PromptText build_ner_prompt(
    const std::string& test_sentence,
    const std::vector<const AnnotatedSentence*>& examples,
    std::string_view version) {
  require_version(version);
  std::string text{kNerHeaderV1};
  for (const AnnotatedSentence* example : examples) {
    text += context_block(example->text);
    text += "## Detected Named Entities with Intention:\n";
    text += render_entities_with_intention(example->software) + "\n";
  }
  text += context_block(test_sentence);
  text += "## Detected Named Entities with Intention:\n";
  return {std::move(text), static_cast<int>(examples.size()), 1,
          std::string(version)};
}

PromptText build_attr_prompt(
    const std::string& test_sentence, const std::vector<Mention>& known_software,
    const std::vector<const AnnotatedSentence*>& examples,
    std::string_view version) {
  require_version(version);
  std::string text{kAttrHeaderV1};
  for (const AnnotatedSentence* example : examples) {
    text += context_block(example->text);
    text += "### Detected Software Related Named Entities:\n";
    text += render_plain_mentions(example->software) + "\n";
    text += "\n### Detected Attributive Text Spans:\n";
    text += render_plain_mentions(example->attributes) + "\n";
    text += "\n";
  }
  text += context_block(test_sentence);
  text += "### Detected Software Related Named Entities:\n";
  text += render_plain_mentions(known_software) + "\n";
  text += "\n### Detected Attributive Text Spans:\n";
  return {std::move(text), static_cast<int>(examples.size()), 2,
          std::string(version)};
}

ScqaPrompt build_scqa_prompt(
    const std::string& test_sentence,
    const std::vector<relations::Question>& test_questions,
    const std::vector<ScqaFewshot>& fewshot, std::string_view version) {
  require_version(version);
  if (test_questions.empty())
    raise(ErrorKind::Config, "nothing to ask: empty test question list");

  ScqaPrompt result;
  std::string text{kScqaHeaderV1};
  size_t next_index = 0;
  bool first_block = true;
  for (const ScqaFewshot& block : fewshot) {
    if (!first_block) text += "\n";
    first_block = false;
    size_t block_first = next_index;
    text += "## Sentence:\n\"\"\"" + block.sentence->text + "\"\"\"\n";
    text += "### Question(s):\n";
    text += question_groups(block.questions, next_index, nullptr);
    text += "\n### Answers to the questions about the sentence(s):\n";
    text += render_scqa_answer_lines(block_first, block.answers);
  }
  if (!first_block) text += "\n";
  text += "## Sentence:\n\"\"\"" + test_sentence + "\"\"\"\n";
  text += "\n### Question(s):\n";
  text += question_groups(test_questions, next_index,
                          &result.test_claim_indices);
  text += "\n### Answers to the questions about the sentence(s):\n";

  for (const auto& row : result.test_claim_indices)
    result.expected_indices.insert(row.begin(), row.end());
  result.prompt = {std::move(text), static_cast<int>(fewshot.size()), 3,
                   std::string(version)};
  return result;
}

namespace {

// Finds the first balanced JSON array in raw, honoring strings and escapes.
std::optional<std::string> first_json_array(const std::string& raw) {
  for (size_t start = raw.find('['); start != std::string::npos;
       start = raw.find('[', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < raw.size(); ++i) {
      char c = raw[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '[') {
        ++depth;
      } else if (c == ']') {
        --depth;
        if (depth == 0) {
          std::string candidate = raw.substr(start, i - start + 1);
          json parsed = json::parse(candidate, nullptr, false);
          if (!parsed.is_discarded() && parsed.is_array()) return candidate;
          break;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

ParsedNerResponse parse_ner_response(const std::string& raw, NerParseMode mode,
                                     const LabelConfig& config) {
  auto array_text = first_json_array(raw);
  if (!array_text)
    raise(ErrorKind::Parse,
          "no JSON array found in model response: " + raw);
  json array = json::parse(*array_text);

  ParsedNerResponse result;
  for (const json& item : array) {
    if (!item.is_object()) {
      result.rejected.push_back({item.dump(), "not an object"});
      continue;
    }
    if (!item.contains("text") || !item.at("text").is_string() ||
        !item.contains("label") || !item.at("label").is_string()) {
      result.rejected.push_back({item.dump(), "missing text or label"});
      continue;
    }
    std::string surface = item.at("text").get<std::string>();
    std::string label_str = item.at("label").get<std::string>();
    align::GeneratedMention gm;
    gm.surface = surface;
    if (mode == NerParseMode::EntitiesWithIntention) {
      auto label = parse_entity_label(label_str);
      if (!label) {
        result.rejected.push_back({item.dump(),
                                   "unknown entity label '" + label_str + "'"});
        continue;
      }
      gm.label = *label;
      if (!item.contains("intention") || !item.at("intention").is_string()) {
        result.rejected.push_back({item.dump(), "missing intention"});
        continue;
      }
      std::string intent_str = item.at("intention").get<std::string>();
      auto intent = parse_intention_label(intent_str);
      if (!intent) {
        result.rejected.push_back(
            {item.dump(), "unknown intention '" + intent_str + "'"});
        continue;
      }
      gm.intention = *intent;
    } else {
      if (auto attr = parse_attribute_label(label_str)) {
        gm.label = *attr;
      } else if (config.coreference_as_attribute &&
                 label_str == "SoftwareCoreference") {
        gm.label = EntityLabel::SoftwareCoreference;
      } else {
        result.rejected.push_back(
            {item.dump(), "unknown attribute label '" + label_str + "'"});
        continue;
      }
    }
    result.items.push_back(std::move(gm));
  }
  return result;
}

ParsedScQaResponse parse_scqa_response(const std::string& raw,
                                       const std::set<size_t>& expected) {
  if (expected.empty())
    raise(ErrorKind::Config, "parse_scqa_response: empty expected index set");
  static const std::regex line_re(R"(^\s*idx_(\d+)\s*:\s*(true|false)\s*$)",
                                  std::regex::icase);
  ParsedScQaResponse result;
  size_t parsed_lines = 0;
  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (!std::regex_match(line, m, line_re)) continue;
    size_t index = 0;
    try {
      index = std::stoul(m[1].str());
    } catch (const std::out_of_range&) {
      continue;
    }
    ++parsed_lines;
    char first = static_cast<char>(std::tolower(m[2].str()[0]));
    bool value = first == 't';
    if (expected.count(index)) {
      result.answers[index] = value;
    } else {
      result.surplus.insert(index);
    }
  }
  if (parsed_lines == 0)
    raise(ErrorKind::Parse,
          "no idx_<n>: True|False lines found in model response: " + raw);
  for (size_t index : expected) {
    if (!result.answers.count(index)) result.missing.insert(index);
  }
  return result;
}

}  // namespace softmention::prompts
