#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qgc/attention.hpp"
#include "qgc/filtering.hpp"
#include "qgc/prompt_template.hpp"
#include "qgc/scoring.hpp"
#include "qgc/text.hpp"

namespace qgc {

enum class FilterMode { Phrase, Sentence, Dynamic };
enum class BudgetScope { PerDocument, Global };

FilterMode parse_filter_mode(std::string_view s);
BudgetScope parse_budget_scope(std::string_view s);
std::string_view to_string(FilterMode mode);
std::string_view to_string(BudgetScope scope);

struct CompressionConfig {
  double tau = 0.5;  // kept fraction; compression ratio is 1 / tau
  FilterMode mode = FilterMode::Phrase;
  BudgetScope scope = BudgetScope::PerDocument;
  SmoothingParams smoothing;
  PromptTemplate prompt_template = PromptTemplate::default_chat();
  std::size_t parallelism = 1;

  void validate() const;
};

struct CompressedDocument {
  std::string document_id;
  CompressedText compressed;
  std::size_t source_words = 0;
  std::vector<double> alpha2;
  std::vector<double> alpha3;
  std::vector<bool> selected;  // per source word
  std::vector<SentenceSpan> sentences;
  std::string provider_id;
};

// One document filled into the template, sent to the provider, and scored.
struct ScoredDocument {
  ScoredWords scored;
  std::vector<SentenceSpan> sentences;  // scored by alpha2
  std::string provider_id;
};

ScoredDocument score_document(const Document& doc, std::string_view query,
                              std::string_view instruction, const CompressionConfig& config,
                              AttentionProvider& provider);

/// Errors carry the document id as context.
CompressedDocument compress_document(const Document& doc, std::string_view query,
                                     std::string_view instruction, const CompressionConfig& config,
                                     AttentionProvider& provider);

/// Per-document scope compresses each document at tau independently. Global
/// scope scores each document on its own, then applies one budget over the
/// concatenated words (or sentences, which never cross documents).
/// Results come back in input order.
std::vector<CompressedDocument> compress_context(const std::vector<Document>& docs,
                                                 std::string_view query,
                                                 std::string_view instruction,
                                                 const CompressionConfig& config,
                                                 AttentionProvider& provider);

}  // namespace qgc
