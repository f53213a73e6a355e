#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qgc/attention.hpp"
#include "qgc/prompt_template.hpp"
#include "qgc/text.hpp"

namespace qgc {

struct SmoothingParams {
  double sigma = 1.0;       // in words
  std::size_t radius = 3;   // in words

  void validate() const;
};

struct ScoredWords {
  std::vector<Word> words;
  std::vector<double> alpha2;                 // max over each word's tokens
  std::optional<std::vector<double>> alpha3;  // after Gaussian smoothing
  SmoothingParams smoothing;
};

/// Softmax over the raw attention values of the context slice.
std::vector<double> renormalize_context(const AttentionRecord& record);
std::vector<double> softmax(std::span<const double> values);

/// Per-word max over mapped context-token scores. Throws Alignment for words
/// without tokens.
std::vector<double> aggregate_to_words(std::span<const double> alpha1, const TokenWordMap& map,
                                       std::size_t word_count);

/// Unit-sum kernel exp(-d^2 / (2 sigma^2)) for d in [-radius, radius].
std::vector<double> gaussian_kernel(double sigma, std::size_t radius);

/// Convolution with the unit-sum kernel. Out-of-range taps reflect about the
/// array edges (half-sample symmetric), which preserves total mass and fixes
/// constant arrays exactly.
std::vector<double> gaussian_smooth(std::span<const double> alpha2, double sigma, std::size_t radius);

/// Context tokens of `record` re-expressed relative to the context text and
/// clipped to it.
std::vector<Token> context_tokens_relative(const AttentionRecord& record, CharSpan context);

/// Full scoring chain for one document inserted at prompt.context_char_span.
ScoredWords score_words(const AttentionRecord& record, const FilledPrompt& prompt,
                        const std::vector<Word>& words, const SmoothingParams& smoothing);

}  // namespace qgc
