#include "softmention/utf8.hpp"

#include "softmention/error.hpp"

namespace softmention::utf8 {

namespace {

// Decodes one code point starting at byte i; advances i. Invalid sequences
// are treated as Latin-1 bytes so off-spec fixtures still load.
uint32_t decode_one(std::string_view s, size_t& i) {
  auto byte = [&](size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  auto cont = [&](size_t k) {
    return k < s.size() && (byte(k) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
    uint32_t cp = (uint32_t(b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
    uint32_t cp = (uint32_t(b0 & 0x0F) << 12) |
                  (uint32_t(byte(i + 1) & 0x3F) << 6) | (byte(i + 2) & 0x3F);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
    uint32_t cp = (uint32_t(b0 & 0x07) << 18) |
                  (uint32_t(byte(i + 1) & 0x3F) << 12) |
                  (uint32_t(byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
    i += 4;
    return cp;
  }
  ++i;
  return b0;
}

}  // namespace

Decoded decode(std::string_view text) {
  Decoded d;
  d.cps.reserve(text.size());
  d.byte_offsets.reserve(text.size() + 1);
  size_t i = 0;
  while (i < text.size()) {
    d.byte_offsets.push_back(i);
    d.cps.push_back(decode_one(text, i));
  }
  d.byte_offsets.push_back(text.size());
  return d;
}

size_t cp_length(std::string_view text) {
  size_t n = 0, i = 0;
  while (i < text.size()) {
    decode_one(text, i);
    ++n;
  }
  return n;
}

std::string slice(const Decoded& d, std::string_view text, size_t start_cp,
                  size_t end_cp) {
  if (start_cp > end_cp || end_cp > d.size()) {
    raise(ErrorKind::Data, "code point slice [" + std::to_string(start_cp) +
                               ", " + std::to_string(end_cp) +
                               ") out of range for text of length " +
                               std::to_string(d.size()));
  }
  size_t b0 = d.byte_offsets[start_cp];
  size_t b1 = d.byte_offsets[end_cp];
  return std::string(text.substr(b0, b1 - b0));
}

std::string slice(std::string_view text, size_t start_cp, size_t end_cp) {
  return slice(decode(text), text, start_cp, end_cp);
}

bool is_ascii_space(uint32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
         cp == '\v';
}

bool is_word_cp(uint32_t cp) {
  return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
         (cp >= 'A' && cp <= 'Z');
}

uint32_t fold_case(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  return cp;
}

std::string normalize_for_match(std::string_view text) {
  Decoded d = decode(text);
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  bool seen_any = false;
  for (size_t i = 0; i < d.size(); ++i) {
    uint32_t cp = d.cps[i];
    if (is_ascii_space(cp)) {
      pending_space = seen_any;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    cp = fold_case(cp);
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else {
      // re-encode the (unfolded beyond ASCII) code point
      size_t b0 = d.byte_offsets[i], b1 = d.byte_offsets[i + 1];
      out.append(text.substr(b0, b1 - b0));
    }
    seen_any = true;
  }
  return out;
}

}  // namespace softmention::utf8
