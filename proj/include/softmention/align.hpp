#pragma once

// Locates generated mention strings as character spans in the source
// sentence. Surfaces the model invented are filtered out, repeated surfaces
// consume occurrences left to right.

#include <optional>
#include <string>
#include <vector>

#include "softmention/corpus.hpp"

namespace softmention::align {

enum class MatchTier { Exact, CaseInsensitive, WhitespaceFlexible };

std::string_view to_string(MatchTier tier);

struct GeneratedMention {
  std::string surface;
  Label label;
  std::optional<IntentionLabel> intention;
};

struct Match {
  Mention mention;
  MatchTier tier = MatchTier::Exact;
};

struct Unmatched {
  std::string surface;
  Label label;
  std::string reason;  // "hallucination" | "no_free_occurrence"
};

struct AlignmentResult {
  std::vector<Match> matched;
  std::vector<Unmatched> unmatched;

  std::vector<Mention> mentions() const;
};

// Tiers are tried in order exact -> case-insensitive -> whitespace-flexible;
// a looser tier is consulted only when the stricter one has no occurrence at
// all. Within a tier, occurrences are enumerated left to right and each item
// takes the leftmost one that does not overlap an earlier match. Matches
// never start or end in the middle of an alphanumeric run.
AlignmentResult locate_mentions(const std::string& text,
                                const std::vector<GeneratedMention>& generated);

// Enumerates boundary-safe occurrences of a surface at one tier.
std::vector<Span> find_occurrences(const std::string& text,
                                   const std::string& surface, MatchTier tier);

// Removes span overlaps: keep the longer span, tie-break earlier start, then
// earlier input order. Output preserves input order of the survivors.
std::vector<Mention> dedupe_overlaps(const std::vector<Mention>& mentions);

}  // namespace softmention::align
