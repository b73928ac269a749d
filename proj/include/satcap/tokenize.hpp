#pragma once

// The one tokenizer every statistic in the library is computed over.
//
// Rules: ASCII case folding, split on whitespace, strip leading/trailing
// punctuation from each piece. Hyphens and apostrophes inside a token stay
// ("c-shaped", "it's"). Digits are ordinary token characters.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace satcap {

struct TokenizedSentence {
  std::vector<std::string> tokens;
  /// Letters and digits in the source text. Non-ASCII code points count as letters.
  std::size_t char_count = 0;

  friend bool operator==(const TokenizedSentence&, const TokenizedSentence&) = default;
};

namespace detail {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

inline bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline char to_lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Typographic quotes, dashes and the ellipsis show up in hand-typed captions.
inline constexpr std::string_view kUnicodePunct[] = {
    "\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\x9C", "\xE2\x80\x9D",
    "\xE2\x80\x93", "\xE2\x80\x94", "\xE2\x80\xA6",
};

/// Length of the punctuation mark starting at `s[0]`, or 0.
inline std::size_t punct_prefix(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(static_cast<unsigned char>(s.front()))) return 1;
  for (auto p : kUnicodePunct)
    if (s.starts_with(p)) return p.size();
  return 0;
}

/// Length of the punctuation mark ending at `s.back()`, or 0.
inline std::size_t punct_suffix(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(static_cast<unsigned char>(s.back()))) return 1;
  for (auto p : kUnicodePunct)
    if (s.ends_with(p)) return p.size();
  return 0;
}

inline std::string_view strip_punct(std::string_view s) {
  while (auto n = punct_prefix(s)) s.remove_prefix(n);
  while (auto n = punct_suffix(s)) s.remove_suffix(n);
  return s;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = to_lower_ascii(c);
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

inline TokenizedSentence tokenize(std::string_view text) {
  TokenizedSentence out;
  for (unsigned char c : text) {
    // UTF-8 continuation bytes (10xxxxxx) belong to an already counted code point.
    if (detail::is_ascii_alnum(c) || c >= 0xC0) ++out.char_count;
  }

  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !detail::is_space(static_cast<unsigned char>(text[j]))) ++j;
    auto piece = detail::strip_punct(text.substr(i, j - i));
    if (!piece.empty()) out.tokens.push_back(detail::to_lower(piece));
    i = j;
  }
  return out;
}

/// Token sequence joined by single spaces. Two captions are "the same
/// sentence" exactly when their normalized forms are equal.
inline std::string normalize(std::string_view text) {
  return detail::join(tokenize(text).tokens);
}

/// Splits on '.', '!' or '?' followed by whitespace or end of text.
/// Segments are trimmed, lose their terminators, and are dropped when empty.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&out](std::string_view seg) {
    seg = detail::trim(seg);
    while (!seg.empty() && (seg.back() == '.' || seg.back() == '!' || seg.back() == '?')) {
      seg.remove_suffix(1);
      seg = detail::trim(seg);
    }
    if (!seg.empty()) out.emplace_back(seg);
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    bool at_boundary =
        i + 1 == text.size() || detail::is_space(static_cast<unsigned char>(text[i + 1]));
    if (!at_boundary) continue;
    emit(text.substr(start, i + 1 - start));
    start = i + 1;
  }
  if (start < text.size()) emit(text.substr(start));
  return out;
}

}  // namespace satcap
