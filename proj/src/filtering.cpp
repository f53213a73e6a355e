#include "qgc/filtering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "qgc/error.hpp"

namespace qgc {

namespace {

bool is_terminator(char32_t cp) {
  return cp == U'.' || cp == U'!' || cp == U'?' || cp == U'。' || cp == U'！' ||
         cp == U'？';
}

bool is_closer(char32_t cp) {
  switch (cp) {
    case U'"': case U'\'': case U')': case U']': case U'}':
    case U'”': case U'’': case U'»': case U'」': case U'』': case U'）':
      return true;
    default:
      return false;
  }
}

bool is_opener(char32_t cp) {
  switch (cp) {
    case U'"': case U'\'': case U'(': case U'[': case U'{':
    case U'“': case U'‘': case U'«': case U'「': case U'『': case U'（':
      return true;
    default:
      return false;
  }
}

bool ends_sentence(std::string_view surface) {
  std::vector<std::pair<char32_t, std::size_t>> cps;  // (code point, byte offset)
  for (std::size_t pos = 0; pos < surface.size();) {
    const std::size_t at = pos;
    cps.emplace_back(utf8::decode(surface, pos), at);
  }
  std::size_t end = cps.size();
  while (end > 0 && is_closer(cps[end - 1].first)) --end;
  if (end == 0 || !is_terminator(cps[end - 1].first)) return false;
  if (cps[end - 1].first != U'.') return true;

  std::size_t begin = 0;
  while (begin < end - 1 && is_opener(cps[begin].first)) ++begin;
  const std::size_t from = begin < cps.size() ? cps[begin].second : surface.size();
  const std::size_t to = cps[end - 1].second;
  return from >= to || !is_abbreviation(surface.substr(from, to - from));
}

void check_sizes(std::size_t words, std::span<const double> scores, const char* name) {
  if (scores.size() != words) {
    throw Error(ErrorKind::Alignment, std::string(name) + " has " + std::to_string(scores.size()) +
                                          " scores for " + std::to_string(words) + " words");
  }
}

}  // namespace

void validate_tau(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw Error(ErrorKind::Config, "tau must lie in (0, 1], got " + std::to_string(tau));
  }
}

std::size_t budget_words(std::size_t word_count, double tau) {
  validate_tau(tau);
  if (word_count == 0) return 0;
  const auto raw = static_cast<std::size_t>(std::floor(tau * static_cast<double>(word_count) + 1e-9));
  return std::min(word_count, std::max<std::size_t>(1, raw));
}

std::vector<std::size_t> select_top_k(std::span<const double> scores, std::size_t k) {
  k = std::min(k, scores.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> select_sentences(std::span<const SentenceSpan> sentences,
                                          std::span<const double> word_scores, std::size_t k) {
  std::vector<double> score(sentences.size(), -INFINITY);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (std::size_t w = sentences[s].word_start; w < sentences[s].word_end; ++w) {
      score[s] = std::max(score[s], word_scores[w]);
    }
  }
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

  std::vector<bool> taken(sentences.size(), false);
  std::size_t used = 0;
  for (std::size_t s : order) {
    const std::size_t len = sentences[s].size();
    if (len == 0 || used + len > k) continue;
    taken[s] = true;
    used += len;
  }
  std::vector<std::size_t> selected;
  selected.reserve(used);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (!taken[s]) continue;
    for (std::size_t w = sentences[s].word_start; w < sentences[s].word_end; ++w) selected.push_back(w);
  }
  return selected;
}

std::vector<std::size_t> select_dynamic(std::span<const SentenceSpan> sentences,
                                        std::span<const double> sentence_scores,
                                        std::span<const double> topup_scores, std::size_t k) {
  const std::size_t n = topup_scores.size();
  if (k >= n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  auto selected = select_sentences(sentences, sentence_scores, k);
  const std::size_t remaining = k - selected.size();
  if (remaining == 0) return selected;

  std::vector<bool> in(n, false);
  for (std::size_t w : selected) in[w] = true;
  std::vector<std::size_t> pool;
  std::vector<double> pool_scores;
  for (std::size_t w = 0; w < n; ++w) {
    if (in[w]) continue;
    pool.push_back(w);
    pool_scores.push_back(topup_scores[w]);
  }
  for (std::size_t p : select_top_k(pool_scores, remaining)) selected.push_back(pool[p]);
  std::sort(selected.begin(), selected.end());
  return selected;
}

CompressedText render_selection(const std::vector<Word>& words, std::vector<std::size_t> selected) {
  CompressedText out;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i] >= words.size() || (i > 0 && selected[i] <= selected[i - 1])) {
      throw Error(ErrorKind::Alignment, "selection must be strictly increasing word indices");
    }
    if (i > 0) out.rendered.push_back(' ');
    out.rendered += words[selected[i]].surface;
  }
  out.achieved_ratio = static_cast<double>(words.size()) /
                       static_cast<double>(std::max<std::size_t>(1, selected.size()));
  out.selected_word_indices = std::move(selected);
  return out;
}

bool is_abbreviation(std::string_view body) {
  static constexpr std::array<std::string_view, 15> kAbbreviations = {
      "Mr", "Mrs", "Ms", "Dr", "Prof", "St", "vs", "etc", "e.g", "i.e", "Fig", "No", "U.S", "a.m", "p.m"};
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), body) != kAbbreviations.end();
}

std::vector<SentenceSpan> split_sentences(const std::vector<Word>& words) {
  std::vector<SentenceSpan> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (ends_sentence(words[i].surface)) {
      spans.push_back({start, i + 1, 0.0});
      start = i + 1;
    }
  }
  if (start < words.size()) spans.push_back({start, words.size(), 0.0});
  return spans;
}

void score_sentences(std::span<SentenceSpan> sentences, std::span<const double> word_scores) {
  for (auto& s : sentences) {
    s.score = -INFINITY;
    for (std::size_t w = s.word_start; w < s.word_end; ++w) s.score = std::max(s.score, word_scores[w]);
  }
}

CompressedText phrase_filter(const std::vector<Word>& words, std::span<const double> alpha3, double tau) {
  check_sizes(words.size(), alpha3, "alpha3");
  return render_selection(words, select_top_k(alpha3, budget_words(words.size(), tau)));
}

CompressedText sentence_filter(const std::vector<Word>& words, std::span<const SentenceSpan> sentences,
                               std::span<const double> alpha2, double tau) {
  check_sizes(words.size(), alpha2, "alpha2");
  const std::size_t k = budget_words(words.size(), tau);
  auto selected = select_sentences(sentences, alpha2, k);
  if (selected.empty() && k > 0) selected = select_top_k(alpha2, k);
  return render_selection(words, std::move(selected));
}

CompressedText dynamic_filter(const std::vector<Word>& words, std::span<const SentenceSpan> sentences,
                              std::span<const double> alpha2, std::span<const double> alpha3,
                              double tau) {
  check_sizes(words.size(), alpha2, "alpha2");
  check_sizes(words.size(), alpha3, "alpha3");
  return render_selection(
      words, select_dynamic(sentences, alpha2, alpha3, budget_words(words.size(), tau)));
}

}  // namespace qgc
