#include "softmention/labels.hpp"

namespace softmention {

std::string_view to_string(EntityLabel label) {
  switch (label) {
    case EntityLabel::Application: return "Application";
    case EntityLabel::OperatingSystem: return "OperatingSystem";
    case EntityLabel::PlugIn: return "PlugIn";
    case EntityLabel::ProgrammingEnvironment: return "ProgrammingEnvironment";
    case EntityLabel::SoftwareCoreference: return "SoftwareCoreference";
  }
  return "?";
}

std::string_view to_string(IntentionLabel label) {
  switch (label) {
    case IntentionLabel::Usage: return "Usage";
    case IntentionLabel::Deposition: return "Deposition";
    case IntentionLabel::Creation: return "Creation";
    case IntentionLabel::Mention: return "Mention";
  }
  return "?";
}

std::string_view to_string(AttributeLabel label) {
  switch (label) {
    case AttributeLabel::Version: return "Version";
    case AttributeLabel::Developer: return "Developer";
    case AttributeLabel::Citation: return "Citation";
    case AttributeLabel::URL: return "URL";
    case AttributeLabel::Release: return "Release";
    case AttributeLabel::Abbreviation: return "Abbreviation";
    case AttributeLabel::License: return "License";
    case AttributeLabel::Extension: return "Extension";
    case AttributeLabel::AlternativeName: return "AlternativeName";
  }
  return "?";
}

std::string_view to_string(RelationType relation) {
  switch (relation) {
    case RelationType::Abbreviation_of: return "Abbreviation_of";
    case RelationType::Developer_of: return "Developer_of";
    case RelationType::Release_of: return "Release_of";
    case RelationType::Version_of: return "Version_of";
    case RelationType::Citation_of: return "Citation_of";
    case RelationType::PlugIn_of: return "PlugIn_of";
    case RelationType::URL_of: return "URL_of";
    case RelationType::Extension_of: return "Extension_of";
    case RelationType::License_of: return "License_of";
    case RelationType::AlternativeName_of: return "AlternativeName_of";
    case RelationType::Specification_of: return "Specification_of";
  }
  return "?";
}

std::string label_name(const Label& label) {
  if (std::holds_alternative<EntityLabel>(label)) {
    return std::string(to_string(std::get<EntityLabel>(label)));
  }
  return std::string(to_string(std::get<AttributeLabel>(label)));
}

std::optional<EntityLabel> parse_entity_label(std::string_view s) {
  for (EntityLabel label : kAllEntityLabels) {
    if (s == to_string(label)) return label;
  }
  // Alias used by the subtask-1 prompt template.
  if (s == "SoftwarePackageOrPlugin") return EntityLabel::PlugIn;
  return std::nullopt;
}

std::optional<IntentionLabel> parse_intention_label(std::string_view s) {
  for (IntentionLabel label : kAllIntentionLabels) {
    if (s == to_string(label)) return label;
  }
  return std::nullopt;
}

std::optional<AttributeLabel> parse_attribute_label(std::string_view s) {
  for (AttributeLabel label : kAllAttributeLabels) {
    if (s == to_string(label)) return label;
  }
  return std::nullopt;
}

std::optional<RelationType> parse_relation_type(std::string_view s) {
  for (RelationType relation : kAllRelationTypes) {
    if (s == to_string(relation)) return relation;
  }
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view s) {
  if (auto attr = parse_attribute_label(s)) return Label(*attr);
  if (auto ent = parse_entity_label(s)) return Label(*ent);
  return std::nullopt;
}

RelationType canonical_relation(AttributeLabel label) {
  switch (label) {
    case AttributeLabel::Version: return RelationType::Version_of;
    case AttributeLabel::Developer: return RelationType::Developer_of;
    case AttributeLabel::Citation: return RelationType::Citation_of;
    case AttributeLabel::URL: return RelationType::URL_of;
    case AttributeLabel::Release: return RelationType::Release_of;
    case AttributeLabel::Abbreviation: return RelationType::Abbreviation_of;
    case AttributeLabel::License: return RelationType::License_of;
    case AttributeLabel::Extension: return RelationType::Extension_of;
    case AttributeLabel::AlternativeName:
      return RelationType::AlternativeName_of;
  }
  return RelationType::Version_of;
}

std::vector<RelationType> entity_subject_relations(EntityLabel) {
  // Inner-software relations; admissibility against the signature matrix
  // prunes label combinations that never occur.
  return {RelationType::PlugIn_of, RelationType::Specification_of};
}

std::string_view relation_phrase(RelationType relation) {
  switch (relation) {
    case RelationType::Abbreviation_of: return "the abbreviation of";
    case RelationType::Developer_of: return "the developer of";
    case RelationType::Release_of: return "the release of";
    case RelationType::Version_of: return "the version of";
    case RelationType::Citation_of: return "the citation of";
    case RelationType::PlugIn_of: return "the plugin of";
    case RelationType::URL_of: return "the url of";
    case RelationType::Extension_of: return "the extension of";
    case RelationType::License_of: return "the license of";
    case RelationType::AlternativeName_of: return "the alternative name of";
    case RelationType::Specification_of: return "the specification of";
  }
  return "?";
}

bool is_entity(const Label& label) {
  return std::holds_alternative<EntityLabel>(label);
}

bool is_attribute(const Label& label) {
  return std::holds_alternative<AttributeLabel>(label);
}

int label_rank(const Label& label) {
  if (is_entity(label)) return static_cast<int>(std::get<EntityLabel>(label));
  return 100 + static_cast<int>(std::get<AttributeLabel>(label));
}

}  // namespace softmention
