#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace softmention {

enum class EntityLabel {
  Application,
  OperatingSystem,
  PlugIn,
  ProgrammingEnvironment,
  SoftwareCoreference,
};

enum class IntentionLabel {
  Usage,
  Deposition,
  Creation,
  Mention,
};

enum class AttributeLabel {
  Version,
  Developer,
  Citation,
  URL,
  Release,
  Abbreviation,
  License,
  Extension,
  AlternativeName,
};

enum class RelationType {
  Abbreviation_of,
  Developer_of,
  Release_of,
  Version_of,
  Citation_of,
  PlugIn_of,
  URL_of,
  Extension_of,
  License_of,
  AlternativeName_of,
  Specification_of,
};

// A mention label is either a software entity label or an attribute label.
using Label = std::variant<EntityLabel, AttributeLabel>;

inline constexpr std::array<EntityLabel, 5> kAllEntityLabels = {
    EntityLabel::Application,         EntityLabel::OperatingSystem,
    EntityLabel::PlugIn,              EntityLabel::ProgrammingEnvironment,
    EntityLabel::SoftwareCoreference,
};

inline constexpr std::array<IntentionLabel, 4> kAllIntentionLabels = {
    IntentionLabel::Usage,
    IntentionLabel::Deposition,
    IntentionLabel::Creation,
    IntentionLabel::Mention,
};

inline constexpr std::array<AttributeLabel, 9> kAllAttributeLabels = {
    AttributeLabel::Version,   AttributeLabel::Developer,
    AttributeLabel::Citation,  AttributeLabel::URL,
    AttributeLabel::Release,   AttributeLabel::Abbreviation,
    AttributeLabel::License,   AttributeLabel::Extension,
    AttributeLabel::AlternativeName,
};

inline constexpr std::array<RelationType, 11> kAllRelationTypes = {
    RelationType::Abbreviation_of, RelationType::Developer_of,
    RelationType::Release_of,      RelationType::Version_of,
    RelationType::Citation_of,     RelationType::PlugIn_of,
    RelationType::URL_of,          RelationType::Extension_of,
    RelationType::License_of,      RelationType::AlternativeName_of,
    RelationType::Specification_of,
};

std::string_view to_string(EntityLabel label);
std::string_view to_string(IntentionLabel label);
std::string_view to_string(AttributeLabel label);
std::string_view to_string(RelationType relation);
std::string label_name(const Label& label);

// Parsers accept the canonical spellings plus the "SoftwarePackageOrPlugin"
// alias for PlugIn; they return nullopt on unknown values.
std::optional<EntityLabel> parse_entity_label(std::string_view s);
std::optional<IntentionLabel> parse_intention_label(std::string_view s);
std::optional<AttributeLabel> parse_attribute_label(std::string_view s);
std::optional<RelationType> parse_relation_type(std::string_view s);
std::optional<Label> parse_label(std::string_view s);

// Each attribute label owns exactly one relation type (Version -> Version_of).
RelationType canonical_relation(AttributeLabel label);

// Relation types a software entity mention may appear in as the subject.
std::vector<RelationType> entity_subject_relations(EntityLabel label);

// Lowercase claim phrasing: Version_of -> "the version of".
std::string_view relation_phrase(RelationType relation);

bool is_entity(const Label& label);
bool is_attribute(const Label& label);

// Total order so labels can key maps and sort deterministically.
int label_rank(const Label& label);

inline bool operator==(const Label& a, const Label& b) {
  return a.index() == b.index() &&
         (a.index() == 0 ? std::get<0>(a) == std::get<0>(b)
                         : std::get<1>(a) == std::get<1>(b));
}

inline std::strong_ordering label_order(const Label& a, const Label& b) {
  return label_rank(a) <=> label_rank(b);
}

}  // namespace softmention
