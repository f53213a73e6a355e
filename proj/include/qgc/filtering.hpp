#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qgc/text.hpp"

namespace qgc {

struct SentenceSpan {
  std::size_t word_start = 0;
  std::size_t word_end = 0;  // exclusive
  double score = 0.0;

  std::size_t size() const { return word_end - word_start; }
};

struct CompressedText {
  std::vector<std::size_t> selected_word_indices;  // strictly increasing
  std::string rendered;                            // selected surfaces joined by ' '
  double achieved_ratio = 1.0;                     // L / max(1, selected)
};

void validate_tau(double tau);

/// min(L, max(1, floor(tau * L))) for L >= 1, 0 for L = 0. A 1e-9 slack
/// absorbs representation error in tau (e.g. 0.6 * 15).
std::size_t budget_words(std::size_t word_count, double tau);

// Index-level selection over flat score arrays. Results are ascending.

/// Top k by descending score, ties to the smaller index.
std::vector<std::size_t> select_top_k(std::span<const double> scores, std::size_t k);

/// Greedy whole-sentence packing: sentences by descending score (ties to the
/// earlier one), each added iff it still fits in k; scanning continues past
/// misfits. Sentence scores are recomputed as the max of `word_scores`.
std::vector<std::size_t> select_sentences(std::span<const SentenceSpan> sentences,
                                          std::span<const double> word_scores, std::size_t k);

/// select_sentences on sentence_scores, then topped up to exactly k words by
/// descending topup_scores among unselected words.
std::vector<std::size_t> select_dynamic(std::span<const SentenceSpan> sentences,
                                        std::span<const double> sentence_scores,
                                        std::span<const double> topup_scores, std::size_t k);

CompressedText render_selection(const std::vector<Word>& words, std::vector<std::size_t> selected);

/// Sentence boundaries after words ending in . ! ? or their fullwidth forms
/// (optionally followed by closing quotes/brackets), except known
/// abbreviations. The trailing partial sentence is closed at the end.
std::vector<SentenceSpan> split_sentences(const std::vector<Word>& words);

bool is_abbreviation(std::string_view body);

/// Sets each span's score to the max of its words' scores.
void score_sentences(std::span<SentenceSpan> sentences, std::span<const double> word_scores);

CompressedText phrase_filter(const std::vector<Word>& words, std::span<const double> alpha3, double tau);

/// Falls back to phrase selection on alpha2 when no sentence fits the budget.
CompressedText sentence_filter(const std::vector<Word>& words, std::span<const SentenceSpan> sentences,
                               std::span<const double> alpha2, double tau);

CompressedText dynamic_filter(const std::vector<Word>& words, std::span<const SentenceSpan> sentences,
                              std::span<const double> alpha2, std::span<const double> alpha3,
                              double tau);

}  // namespace qgc
