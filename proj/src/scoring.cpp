#include "qgc/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "qgc/error.hpp"

namespace qgc {

void SmoothingParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::Config, "sigma must be a positive number");
  }
  if (radius < 1) throw Error(ErrorKind::Config, "radius must be at least 1");
}

std::vector<double> softmax(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::Alignment, "empty context slice");
  const double max_v = *std::max_element(values.begin(), values.end());
  std::vector<double> out(values.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(values[i] - max_v);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
  return out;
}

std::vector<double> renormalize_context(const AttentionRecord& record) {
  const auto span = record.context_tokens;
  if (span.start >= span.end || span.end > record.trigger_attention.size()) {
    throw Error(ErrorKind::Alignment, "empty or out-of-range context slice");
  }
  return softmax(std::span(record.trigger_attention).subspan(span.start, span.size()));
}

std::vector<double> aggregate_to_words(std::span<const double> alpha1, const TokenWordMap& map,
                                       std::size_t word_count) {
  if (map.word_to_tokens.size() != word_count) {
    throw Error(ErrorKind::Alignment, "token map covers " + std::to_string(map.word_to_tokens.size()) +
                                          " words, expected " + std::to_string(word_count));
  }
  std::vector<double> out(word_count);
  for (std::size_t w = 0; w < word_count; ++w) {
    const auto& toks = map.word_to_tokens[w];
    if (toks.empty()) throw Error(ErrorKind::Alignment, "word " + std::to_string(w) + " has no tokens");
    double best = -INFINITY;
    for (std::size_t t : toks) {
      if (t >= alpha1.size()) throw Error(ErrorKind::Alignment, "token index out of range");
      best = std::max(best, alpha1[t]);
    }
    out[w] = best;
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma, std::size_t radius) {
  SmoothingParams{sigma, radius}.validate();
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double d = static_cast<double>(i) - static_cast<double>(radius);
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<double> gaussian_smooth(std::span<const double> alpha2, double sigma, std::size_t radius) {
  const auto kernel = gaussian_kernel(sigma, radius);
  const auto n = static_cast<std::ptrdiff_t>(alpha2.size());
  std::vector<double> out(alpha2.size(), 0.0);
  if (n == 0) return out;

  const std::ptrdiff_t period = 2 * n;
  auto reflect = [&](std::ptrdiff_t m) {
    m %= period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
  };
  const auto r = static_cast<std::ptrdiff_t>(radius);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t d = -r; d <= r; ++d) {
      acc += kernel[static_cast<std::size_t>(d + r)] * alpha2[static_cast<std::size_t>(reflect(i + d))];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<Token> context_tokens_relative(const AttentionRecord& record, CharSpan context) {
  std::vector<Token> out;
  out.reserve(record.context_tokens.size());
  for (std::size_t i = record.context_tokens.start; i < record.context_tokens.end; ++i) {
    Token t = record.tokens[i];
    t.index = out.size();
    t.char_start = std::clamp(t.char_start, context.start, context.end) - context.start;
    t.char_end = std::clamp(t.char_end, context.start, context.end) - context.start;
    out.push_back(std::move(t));
  }
  return out;
}

ScoredWords score_words(const AttentionRecord& record, const FilledPrompt& prompt,
                        const std::vector<Word>& words, const SmoothingParams& smoothing) {
  smoothing.validate();
  const auto tokens = context_tokens_relative(record, prompt.context_char_span);
  const auto map = map_tokens_to_words(tokens, words, prompt.context_char_span.size());
  const auto alpha1 = renormalize_context(record);

  ScoredWords scored;
  scored.words = words;
  scored.alpha2 = aggregate_to_words(alpha1, map, words.size());
  scored.alpha3 = gaussian_smooth(scored.alpha2, smoothing.sigma, smoothing.radius);
  scored.smoothing = smoothing;
  return scored;
}

}  // namespace qgc
