#include "qgc/text.hpp"

#include <algorithm>

#include "qgc/error.hpp"

namespace qgc {

namespace utf8 {

char32_t decode(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + extra >= s.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (std::size_t i = 1; i <= extra; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += extra + 1;
  return cp;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) decode(s, pos);
  return n;
}

}  // namespace utf8

std::vector<Word> segment_words(std::string_view text) {
  std::vector<Word> words;
  std::size_t pos = 0;
  bool in_word = false;
  std::size_t start = 0;
  while (pos < text.size()) {
    const std::size_t here = pos;
    const bool space = utf8::is_space(utf8::decode(text, pos));
    if (space && in_word) {
      words.push_back({words.size(), start, here, std::string(text.substr(start, here - start))});
      in_word = false;
    } else if (!space && !in_word) {
      start = here;
      in_word = true;
    }
  }
  if (in_word) {
    words.push_back({words.size(), start, text.size(), std::string(text.substr(start))});
  }
  return words;
}

std::string join_with_gaps(std::string_view text, const std::vector<Word>& words) {
  std::string out;
  std::size_t cursor = 0;
  for (const auto& w : words) {
    out.append(text.substr(cursor, w.char_start - cursor));
    out.append(w.surface);
    cursor = w.char_end;
  }
  out.append(text.substr(cursor));
  return out;
}

Document Document::from_text(std::string id, std::string text,
                             std::optional<std::string> title,
                             std::optional<bool> is_gold) {
  Document doc;
  doc.id = std::move(id);
  doc.title = std::move(title);
  doc.text = std::move(text);
  doc.words = segment_words(doc.text);
  doc.is_gold = is_gold;
  return doc;
}

TokenWordMap map_tokens_to_words(const std::vector<Token>& tokens,
                                 const std::vector<Word>& words,
                                 std::size_t text_size) {
  TokenWordMap map;
  map.token_to_words.resize(tokens.size());
  map.word_to_tokens.resize(words.size());
  if (words.empty()) return map;

  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const Token& tok = tokens[t];
    if (tok.char_start > tok.char_end || tok.char_end > text_size) {
      throw Error(ErrorKind::Alignment,
                  "token " + std::to_string(t) + " range [" + std::to_string(tok.char_start) +
                      ", " + std::to_string(tok.char_end) + ") outside text of size " +
                      std::to_string(text_size));
    }
    // First word ending after the token starts; words are ordered and disjoint.
    auto it = std::upper_bound(words.begin(), words.end(), tok.char_start,
                               [](std::size_t pos, const Word& w) { return pos < w.char_end; });
    auto& hits = map.token_to_words[t];
    for (; it != words.end() && it->char_start < tok.char_end; ++it) {
      if (tok.char_start < tok.char_end) hits.push_back(it->index);
    }
    if (hits.empty()) {
      auto after = std::upper_bound(words.begin(), words.end(), tok.char_start,
                                    [](std::size_t pos, const Word& w) { return pos < w.char_start; });
      hits.push_back(after == words.begin() ? 0 : std::prev(after)->index);
    }
    for (std::size_t w : hits) map.word_to_tokens[w].push_back(t);
  }
  return map;
}

}  // namespace qgc
