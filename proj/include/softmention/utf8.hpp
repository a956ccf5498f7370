#pragma once

// Code-point level helpers. Corpus character offsets count Unicode scalar
// values, not bytes, so every span operation goes through a decoded view.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace softmention::utf8 {

// A decoded string: code points plus the byte offset where each starts.
struct Decoded {
  std::vector<uint32_t> cps;
  std::vector<size_t> byte_offsets;  // size cps.size() + 1, last = byte length

  size_t size() const { return cps.size(); }
};

Decoded decode(std::string_view text);

size_t cp_length(std::string_view text);

// Slice [start, end) in code points. Throws Data error when out of range.
std::string slice(std::string_view text, size_t start_cp, size_t end_cp);
std::string slice(const Decoded& d, std::string_view text, size_t start_cp,
                  size_t end_cp);

bool is_ascii_space(uint32_t cp);
bool is_word_cp(uint32_t cp);  // ASCII alphanumeric
uint32_t fold_case(uint32_t cp);

// Lowercase, trim, and collapse internal whitespace runs to single spaces.
std::string normalize_for_match(std::string_view text);

}  // namespace softmention::utf8
