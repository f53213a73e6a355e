#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qgc {

// Offsets throughout the library are byte offsets into UTF-8 strings, half-open.

struct Word {
  std::size_t index = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string surface;
};

struct Token {
  std::size_t index = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string surface;
};

/// Maximal runs of non-whitespace code points. Unicode whitespace (including
/// NBSP, ideographic space, line/paragraph separators) separates words;
/// punctuation stays attached.
std::vector<Word> segment_words(std::string_view text);

/// Rebuilds the original text from words plus the gaps between them.
std::string join_with_gaps(std::string_view text, const std::vector<Word>& words);

struct Document {
  std::string id;
  std::optional<std::string> title;
  std::string text;
  std::vector<Word> words;
  std::optional<bool> is_gold;

  static Document from_text(std::string id, std::string text,
                            std::optional<std::string> title = std::nullopt,
                            std::optional<bool> is_gold = std::nullopt);

  std::size_t word_count() const { return words.size(); }
};

struct TokenWordMap {
  std::vector<std::vector<std::size_t>> token_to_words;
  std::vector<std::vector<std::size_t>> word_to_tokens;
};

/// Token t maps to word w iff their byte ranges intersect. Tokens that
/// overlap no word attach to the nearest preceding word (or word 0).
/// Throws Alignment if a token range is inverted or exceeds text_size.
TokenWordMap map_tokens_to_words(const std::vector<Token>& tokens,
                                 const std::vector<Word>& words,
                                 std::size_t text_size);

namespace utf8 {

// Decodes one code point at `pos`, advancing `pos`. Invalid bytes decode as
// U+FFFD and advance by one.
char32_t decode(std::string_view s, std::size_t& pos);

bool is_space(char32_t cp);

std::size_t length(std::string_view s);

}  // namespace utf8

}  // namespace qgc
