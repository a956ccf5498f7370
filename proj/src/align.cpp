#include "softmention/align.hpp"

#include <algorithm>
#include <numeric>

#include "softmention/utf8.hpp"

namespace softmention::align {

namespace {

using utf8::Decoded;

bool word_cp(uint32_t cp) { return utf8::is_word_cp(cp); }

// A match must not split an alphanumeric run on either side ("R" must not
// match inside "Rescue").
bool boundary_ok(const Decoded& text, size_t start, size_t end) {
  if (start > 0 && word_cp(text.cps[start - 1]) && word_cp(text.cps[start]))
    return false;
  if (end < text.size() && word_cp(text.cps[end - 1]) && word_cp(text.cps[end]))
    return false;
  return true;
}

bool cp_equal(uint32_t a, uint32_t b, bool fold) {
  if (fold) return utf8::fold_case(a) == utf8::fold_case(b);
  return a == b;
}

// Exact / case-insensitive scan.
std::vector<Span> scan_plain(const Decoded& text, const Decoded& surface,
                             bool fold) {
  std::vector<Span> occurrences;
  if (surface.size() == 0 || surface.size() > text.size()) return occurrences;
  for (size_t i = 0; i + surface.size() <= text.size(); ++i) {
    bool hit = true;
    for (size_t k = 0; k < surface.size(); ++k) {
      if (!cp_equal(text.cps[i + k], surface.cps[k], fold)) {
        hit = false;
        break;
      }
    }
    if (hit && boundary_ok(text, i, i + surface.size()))
      occurrences.push_back({i, i + surface.size()});
  }
  return occurrences;
}

// Whitespace-flexible: split the surface into non-whitespace chunks; chunks
// match case-insensitively and each gap matches one or more whitespace code
// points in the text.
std::vector<Span> scan_ws_flexible(const Decoded& text,
                                   const Decoded& surface) {
  std::vector<std::vector<uint32_t>> chunks;
  std::vector<uint32_t> current;
  for (uint32_t cp : surface.cps) {
    if (utf8::is_ascii_space(cp)) {
      if (!current.empty()) chunks.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) chunks.push_back(std::move(current));

  std::vector<Span> occurrences;
  if (chunks.empty()) return occurrences;

  auto chunk_at = [&](const std::vector<uint32_t>& chunk, size_t pos) {
    if (pos + chunk.size() > text.size()) return false;
    for (size_t k = 0; k < chunk.size(); ++k) {
      if (!cp_equal(text.cps[pos + k], chunk[k], true)) return false;
    }
    return true;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    size_t pos = i;
    bool hit = true;
    for (size_t c = 0; c < chunks.size(); ++c) {
      if (c > 0) {
        size_t ws = 0;
        while (pos < text.size() && utf8::is_ascii_space(text.cps[pos])) {
          ++pos;
          ++ws;
        }
        if (ws == 0) {
          hit = false;
          break;
        }
      }
      if (!chunk_at(chunks[c], pos)) {
        hit = false;
        break;
      }
      pos += chunks[c].size();
    }
    if (hit && boundary_ok(text, i, pos)) occurrences.push_back({i, pos});
  }
  return occurrences;
}

}  // namespace

std::string_view to_string(MatchTier tier) {
  switch (tier) {
    case MatchTier::Exact: return "exact";
    case MatchTier::CaseInsensitive: return "case_insensitive";
    case MatchTier::WhitespaceFlexible: return "whitespace_flexible";
  }
  return "?";
}

std::vector<Span> find_occurrences(const std::string& text,
                                   const std::string& surface,
                                   MatchTier tier) {
  Decoded t = utf8::decode(text);
  Decoded s = utf8::decode(surface);
  switch (tier) {
    case MatchTier::Exact: return scan_plain(t, s, false);
    case MatchTier::CaseInsensitive: return scan_plain(t, s, true);
    case MatchTier::WhitespaceFlexible: return scan_ws_flexible(t, s);
  }
  return {};
}

std::vector<Mention> AlignmentResult::mentions() const {
  std::vector<Mention> out;
  out.reserve(matched.size());
  for (const Match& m : matched) out.push_back(m.mention);
  return out;
}

AlignmentResult locate_mentions(
    const std::string& text, const std::vector<GeneratedMention>& generated) {
  AlignmentResult result;
  std::vector<Span> taken;
  Decoded t = utf8::decode(text);

  for (const GeneratedMention& item : generated) {
    if (item.surface.empty()) {
      result.unmatched.push_back({item.surface, item.label, "hallucination"});
      continue;
    }
    Decoded s = utf8::decode(item.surface);
    std::vector<Span> occurrences;
    MatchTier tier = MatchTier::Exact;
    for (MatchTier candidate :
         {MatchTier::Exact, MatchTier::CaseInsensitive,
          MatchTier::WhitespaceFlexible}) {
      switch (candidate) {
        case MatchTier::Exact: occurrences = scan_plain(t, s, false); break;
        case MatchTier::CaseInsensitive:
          occurrences = scan_plain(t, s, true);
          break;
        case MatchTier::WhitespaceFlexible:
          occurrences = scan_ws_flexible(t, s);
          break;
      }
      tier = candidate;
      if (!occurrences.empty()) break;
    }
    if (occurrences.empty()) {
      result.unmatched.push_back({item.surface, item.label, "hallucination"});
      continue;
    }
    auto free_occurrence =
        std::find_if(occurrences.begin(), occurrences.end(), [&](const Span& o) {
          return std::none_of(taken.begin(), taken.end(),
                              [&](const Span& used) { return o.overlaps(used); });
        });
    if (free_occurrence == occurrences.end()) {
      result.unmatched.push_back(
          {item.surface, item.label, "no_free_occurrence"});
      continue;
    }
    taken.push_back(*free_occurrence);
    Mention m;
    m.surface = item.surface;
    m.label = item.label;
    m.intention = item.intention;
    m.span = *free_occurrence;
    result.matched.push_back({std::move(m), tier});
  }
  return result;
}

std::vector<Mention> dedupe_overlaps(const std::vector<Mention>& mentions) {
  std::vector<size_t> order(mentions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const Span& sa = mentions[a].span;
    const Span& sb = mentions[b].span;
    if (sa.length() != sb.length()) return sa.length() > sb.length();
    if (sa.start != sb.start) return sa.start < sb.start;
    return a < b;
  });
  std::vector<bool> keep(mentions.size(), false);
  std::vector<Span> kept_spans;
  for (size_t i : order) {
    const Span& span = mentions[i].span;
    bool clash = std::any_of(kept_spans.begin(), kept_spans.end(),
                             [&](const Span& k) { return k.overlaps(span); });
    if (!clash) {
      keep[i] = true;
      kept_spans.push_back(span);
    }
  }
  std::vector<Mention> out;
  for (size_t i = 0; i < mentions.size(); ++i) {
    if (keep[i]) out.push_back(mentions[i]);
  }
  return out;
}

}  // namespace softmention::align
