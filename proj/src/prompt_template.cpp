#include "qgc/prompt_template.hpp"

#include <algorithm>
#include <utility>

#include "qgc/error.hpp"

namespace qgc {

namespace {

constexpr std::array<std::string_view, 3> kPlaceholders = {"{s}", "{c}", "{q}"};

}  // namespace

PromptTemplate PromptTemplate::parse(std::string body) {
  PromptTemplate tmpl;
  for (std::size_t slot = 0; slot < kPlaceholders.size(); ++slot) {
    const auto ph = kPlaceholders[slot];
    const auto first = body.find(ph);
    if (first == std::string::npos) {
      throw Error(ErrorKind::Template, "template is missing placeholder " + std::string(ph));
    }
    if (body.find(ph, first + 1) != std::string::npos) {
      throw Error(ErrorKind::Template, "template has more than one " + std::string(ph));
    }
    tmpl.slot_pos_[slot] = first;
  }
  tmpl.body_ = std::move(body);
  const auto cue = tmpl.generation_cue();
  if (cue.empty()) {
    throw Error(ErrorKind::Template,
                "template must end with a generation cue after the last placeholder");
  }
  std::size_t pos = 0;
  char32_t last = 0;
  while (pos < cue.size()) last = utf8::decode(cue, pos);
  if (utf8::is_space(last)) {
    throw Error(ErrorKind::Template, "generation cue must not end with whitespace");
  }
  return tmpl;
}

PromptTemplate PromptTemplate::default_chat() { return parse(std::string(kDefaultTemplate)); }

std::string_view PromptTemplate::generation_cue() const {
  const auto last = *std::max_element(slot_pos_.begin(), slot_pos_.end());
  return std::string_view(body_).substr(last + 3);
}

FilledPrompt fill_template(std::string_view instruction, std::string_view context_text,
                           std::string_view query, const PromptTemplate& tmpl) {
  std::array<std::pair<std::size_t, std::size_t>, 3> order;  // (position, slot)
  for (std::size_t slot = 0; slot < 3; ++slot) {
    order[slot] = {tmpl.placeholder_position(static_cast<PromptTemplate::Slot>(slot)), slot};
  }
  std::sort(order.begin(), order.end());

  const std::array<std::string_view, 3> values = {instruction, context_text, query};
  std::array<CharSpan, 3> spans;

  FilledPrompt out;
  out.text.reserve(tmpl.body().size() + instruction.size() + context_text.size() + query.size());
  std::size_t cursor = 0;
  for (const auto& [pos, slot] : order) {
    out.text.append(tmpl.body(), cursor, pos - cursor);
    spans[slot].start = out.text.size();
    out.text.append(values[slot]);
    spans[slot].end = out.text.size();
    cursor = pos + kPlaceholders[slot].size();
  }
  out.text.append(tmpl.body(), cursor, std::string::npos);

  out.instruction_char_span = spans[PromptTemplate::kInstruction];
  out.context_char_span = spans[PromptTemplate::kContext];
  out.query_char_span = spans[PromptTemplate::kQuery];
  return out;
}

std::size_t locate_trigger(const FilledPrompt& prompt, const std::vector<Token>& tokens) {
  if (tokens.empty()) {
    throw Error(ErrorKind::Template, "cannot locate trigger: prompt has no tokens");
  }
  if (tokens.back().char_end != prompt.text.size()) {
    throw Error(ErrorKind::Template,
                "tokenization does not cover the generation cue (last token ends at " +
                    std::to_string(tokens.back().char_end) + ", prompt length " +
                    std::to_string(prompt.text.size()) + ")");
  }
  return tokens.size() - 1;
}

}  // namespace qgc
