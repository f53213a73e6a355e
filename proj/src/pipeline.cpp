#include "qgc/pipeline.hpp"

#include <algorithm>

#include "qgc/error.hpp"
#include "qgc/parallel.hpp"

namespace qgc {

FilterMode parse_filter_mode(std::string_view s) {
  if (s == "phrase") return FilterMode::Phrase;
  if (s == "sentence") return FilterMode::Sentence;
  if (s == "dynamic") return FilterMode::Dynamic;
  throw Error(ErrorKind::Config, "unknown mode '" + std::string(s) + "' (phrase, sentence, dynamic)");
}

BudgetScope parse_budget_scope(std::string_view s) {
  if (s == "per-doc" || s == "per_document") return BudgetScope::PerDocument;
  if (s == "global") return BudgetScope::Global;
  throw Error(ErrorKind::Config, "unknown scope '" + std::string(s) + "' (per-doc, global)");
}

std::string_view to_string(FilterMode mode) {
  switch (mode) {
    case FilterMode::Phrase: return "phrase";
    case FilterMode::Sentence: return "sentence";
    case FilterMode::Dynamic: return "dynamic";
  }
  return "?";
}

std::string_view to_string(BudgetScope scope) {
  return scope == BudgetScope::Global ? "global" : "per-doc";
}

void CompressionConfig::validate() const {
  validate_tau(tau);
  smoothing.validate();
  if (parallelism == 0) throw Error(ErrorKind::Config, "parallelism must be at least 1");
}

namespace {

std::vector<std::size_t> select(FilterMode mode, std::span<const SentenceSpan> sentences,
                                std::span<const double> alpha2, std::span<const double> alpha3,
                                std::size_t k) {
  switch (mode) {
    case FilterMode::Phrase:
      return select_top_k(alpha3, k);
    case FilterMode::Sentence: {
      auto picked = select_sentences(sentences, alpha2, k);
      if (picked.empty() && k > 0) picked = select_top_k(alpha2, k);
      return picked;
    }
    case FilterMode::Dynamic:
      return select_dynamic(sentences, alpha2, alpha3, k);
  }
  return {};
}

CompressedDocument assemble(const Document& doc, ScoredDocument scored,
                            std::vector<std::size_t> selected) {
  CompressedDocument out;
  out.document_id = doc.id;
  out.source_words = doc.word_count();
  out.selected.assign(doc.word_count(), false);
  for (std::size_t w : selected) out.selected[w] = true;
  out.compressed = render_selection(doc.words, std::move(selected));
  out.alpha2 = std::move(scored.scored.alpha2);
  out.alpha3 = std::move(*scored.scored.alpha3);
  out.sentences = std::move(scored.sentences);
  out.provider_id = std::move(scored.provider_id);
  return out;
}

}  // namespace

ScoredDocument score_document(const Document& doc, std::string_view query,
                              std::string_view instruction, const CompressionConfig& config,
                              AttentionProvider& provider) {
  try {
    if (doc.words.empty()) throw Error(ErrorKind::Validation, "document has no words");
    const FilledPrompt prompt = fill_template(instruction, doc.text, query, config.prompt_template);
    const AttentionRecord record = provider.request(prompt);

    ScoredDocument out;
    out.scored = score_words(record, prompt, doc.words, config.smoothing);
    out.sentences = split_sentences(doc.words);
    score_sentences(out.sentences, out.scored.alpha2);
    out.provider_id = record.provider_id;
    return out;
  } catch (const Error& e) {
    throw e.with_context("document '" + doc.id + "'");
  }
}

CompressedDocument compress_document(const Document& doc, std::string_view query,
                                     std::string_view instruction, const CompressionConfig& config,
                                     AttentionProvider& provider) {
  config.validate();
  ScoredDocument scored = score_document(doc, query, instruction, config, provider);
  const std::size_t k = budget_words(doc.word_count(), config.tau);
  auto selected = select(config.mode, scored.sentences, scored.scored.alpha2, *scored.scored.alpha3, k);
  return assemble(doc, std::move(scored), std::move(selected));
}

std::vector<CompressedDocument> compress_context(const std::vector<Document>& docs,
                                                 std::string_view query,
                                                 std::string_view instruction,
                                                 const CompressionConfig& config,
                                                 AttentionProvider& provider) {
  config.validate();
  if (docs.empty()) throw Error(ErrorKind::Validation, "context has no documents");

  if (config.scope == BudgetScope::PerDocument) {
    std::vector<CompressedDocument> out(docs.size());
    parallel_for(docs.size(), config.parallelism, [&](std::size_t i) {
      out[i] = compress_document(docs[i], query, instruction, config, provider);
    });
    return out;
  }

  std::vector<ScoredDocument> scored(docs.size());
  parallel_for(docs.size(), config.parallelism, [&](std::size_t i) {
    scored[i] = score_document(docs[i], query, instruction, config, provider);
  });

  std::vector<std::size_t> offsets(docs.size() + 1, 0);
  std::vector<double> alpha2;
  std::vector<double> alpha3;
  std::vector<SentenceSpan> sentences;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& s = scored[i];
    offsets[i + 1] = offsets[i] + s.scored.alpha2.size();
    alpha2.insert(alpha2.end(), s.scored.alpha2.begin(), s.scored.alpha2.end());
    alpha3.insert(alpha3.end(), s.scored.alpha3->begin(), s.scored.alpha3->end());
    for (SentenceSpan span : s.sentences) {
      span.word_start += offsets[i];
      span.word_end += offsets[i];
      sentences.push_back(span);
    }
  }

  const std::size_t k = budget_words(alpha2.size(), config.tau);
  const auto selected = select(config.mode, sentences, alpha2, alpha3, k);

  std::vector<std::vector<std::size_t>> per_doc(docs.size());
  for (std::size_t w : selected) {
    const auto doc = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), w) - offsets.begin() - 1);
    per_doc[doc].push_back(w - offsets[doc]);
  }
  std::vector<CompressedDocument> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    out.push_back(assemble(docs[i], std::move(scored[i]), std::move(per_doc[i])));
  }
  return out;
}

}  // namespace qgc
