#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qgc/text.hpp"

namespace qgc {

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool operator==(const CharSpan&) const = default;
};

// A literal template with exactly one each of the placeholders {s}
// (instruction), {c} (context) and {q} (query). The literal text after the
// last placeholder is the generation cue; it must be non-empty and end with a
// non-whitespace character, since its final token is the trigger.
class PromptTemplate {
 public:
  static PromptTemplate parse(std::string body);
  static PromptTemplate default_chat();

  const std::string& body() const { return body_; }
  std::string_view generation_cue() const;

  enum Slot { kInstruction = 0, kContext = 1, kQuery = 2 };
  std::size_t placeholder_position(Slot slot) const { return slot_pos_[slot]; }

 private:
  std::string body_;
  std::array<std::size_t, 3> slot_pos_{};
};

inline constexpr std::string_view kDefaultTemplate =
    "SYSTEM: {s}\nUSER: Context:\n{c}\n\nQuestion: {q}\nASSISTANT: Answer:";

struct FilledPrompt {
  std::string text;
  CharSpan instruction_char_span;
  CharSpan context_char_span;
  CharSpan query_char_span;
};

/// Literal substitution; spans come from insertion offsets, never from search.
FilledPrompt fill_template(std::string_view instruction, std::string_view context_text,
                           std::string_view query, const PromptTemplate& tmpl);

/// Index of the trigger (last) token. Throws Template when tokens are empty
/// or the last token does not end at the end of the prompt text.
std::size_t locate_trigger(const FilledPrompt& prompt, const std::vector<Token>& tokens);

}  // namespace qgc
