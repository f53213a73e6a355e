#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qgc/error.hpp"
#include "qgc/pipeline.hpp"

namespace qgc {
namespace {

constexpr std::string_view kQuery = "who wrote the letter";
constexpr std::string_view kInstruction = "Answer the question based on the given context.";

std::string random_text(std::mt19937_64& rng, std::size_t words) {
  static const std::vector<std::string> vocab = {"the", "letter", "was", "written", "by", "Anna.",
                                                 "river", "north", "wrote", "quietly", "Then", "who?"};
  std::string text;
  for (std::size_t i = 0; i < words; ++i) text += (i ? " " : "") + vocab[rng() % vocab.size()];
  return text;
}

std::vector<Document> random_docs(std::mt19937_64& rng, std::size_t n, std::size_t min_words,
                                  std::size_t max_words) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = min_words + rng() % (max_words - min_words + 1);
    docs.push_back(Document::from_text(std::to_string(i), random_text(rng, len)));
  }
  return docs;
}

// Counts calls so tests can see whether a document was scored at all.
class CountingProvider final : public AttentionProvider {
 public:
  AttentionRecord trigger_attention(const FilledPrompt& prompt) override {
    ++calls;
    return inner.trigger_attention(prompt);
  }
  std::string id() const override { return inner.id(); }

  ReferenceProvider inner{ReferenceModelConfig{}};
  int calls = 0;
};

TEST(Pipeline, TauOneIsIdentity) {
  std::mt19937_64 rng(1);
  ReferenceProvider provider{ReferenceModelConfig{}};
  for (auto mode : {FilterMode::Phrase, FilterMode::Sentence, FilterMode::Dynamic}) {
    CompressionConfig config;
    config.tau = 1.0;
    config.mode = mode;
    const auto doc = Document::from_text("d", random_text(rng, 17));
    const auto out = compress_document(doc, kQuery, kInstruction, config, provider);
    EXPECT_EQ(out.compressed.rendered, doc.text);
    EXPECT_EQ(out.compressed.selected_word_indices.size(), 17u);
  }
}

TEST(Pipeline, OneWordDocumentKeepsItsWord) {
  ReferenceProvider provider{ReferenceModelConfig{}};
  CompressionConfig config;
  config.tau = 0.1;
  const auto out = compress_document(Document::from_text("d", "Paris"), kQuery, kInstruction, config, provider);
  EXPECT_EQ(out.compressed.rendered, "Paris");
  ASSERT_EQ(out.alpha2.size(), 1u);
  EXPECT_NEAR(out.alpha3[0], out.alpha2[0], 1e-12);
}

TEST(Pipeline, TraceIsComplete) {
  std::mt19937_64 rng(2);
  ReferenceProvider provider{ReferenceModelConfig{}};
  CompressionConfig config;
  const auto doc = Document::from_text("d", random_text(rng, 30));
  const auto out = compress_document(doc, kQuery, kInstruction, config, provider);
  EXPECT_EQ(out.document_id, "d");
  EXPECT_EQ(out.source_words, 30u);
  EXPECT_EQ(out.alpha2.size(), 30u);
  EXPECT_EQ(out.alpha3.size(), 30u);
  EXPECT_EQ(out.selected.size(), 30u);
  EXPECT_EQ(out.provider_id, provider.id());
  double m2 = 0, m3 = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    m2 += out.alpha2[i];
    m3 += out.alpha3[i];
    const bool listed = std::binary_search(out.compressed.selected_word_indices.begin(),
                                           out.compressed.selected_word_indices.end(), i);
    EXPECT_EQ(out.selected[i], listed);
  }
  // Word scores take the max over tokens, so they sum to at most 1; smoothing keeps that mass.
  EXPECT_LE(m2, 1.0 + 1e-12);
  EXPECT_GT(m2, 0.0);
  EXPECT_NEAR(m3, m2, 1e-9);
}

TEST(Pipeline, PerDocumentBudgets) {
  std::mt19937_64 rng(3);
  ReferenceProvider provider{ReferenceModelConfig{}};
  const auto docs = random_docs(rng, 2, 10, 10);
  CompressionConfig config;
  const auto out = compress_context(docs, kQuery, kInstruction, config, provider);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].compressed.selected_word_indices.size(), 5u);
  EXPECT_EQ(out[1].compressed.selected_word_indices.size(), 5u);
}

TEST(Pipeline, GlobalPhraseMatchesTopKOracle) {
  std::mt19937_64 rng(4);
  ReferenceProvider provider{ReferenceModelConfig{}};
  for (int iter = 0; iter < 10; ++iter) {
    const auto docs = random_docs(rng, 2 + rng() % 3, 4, 12);
    CompressionConfig config;
    config.scope = BudgetScope::Global;
    const auto out = compress_context(docs, kQuery, kInstruction, config, provider);

    std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> all;
    std::size_t total = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const auto alone = compress_document(docs[d], kQuery, kInstruction, config, provider);
      EXPECT_EQ(alone.alpha3, out[d].alpha3);
      for (std::size_t w = 0; w < alone.alpha3.size(); ++w) all.push_back({alone.alpha3[w], {d, w}});
      total += alone.alpha3.size();
    }
    // Oracle: sort by (score desc, document asc, word asc) and take the budget.
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const std::size_t k = budget_words(total, config.tau);
    std::vector<std::vector<std::size_t>> expected(docs.size());
    for (std::size_t i = 0; i < k; ++i) expected[all[i].second.first].push_back(all[i].second.second);
    std::size_t kept = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::sort(expected[d].begin(), expected[d].end());
      EXPECT_EQ(out[d].compressed.selected_word_indices, expected[d]);
      kept += out[d].compressed.selected_word_indices.size();
    }
    EXPECT_EQ(kept, k);
  }
}

TEST(Pipeline, GlobalSentencesNeverCrossDocuments) {
  std::mt19937_64 rng(5);
  ReferenceProvider provider{ReferenceModelConfig{}};
  for (int iter = 0; iter < 10; ++iter) {
    const auto docs = random_docs(rng, 3, 5, 15);
    for (auto mode : {FilterMode::Sentence, FilterMode::Dynamic}) {
      CompressionConfig config;
      config.scope = BudgetScope::Global;
      config.mode = mode;
      const auto out = compress_context(docs, kQuery, kInstruction, config, provider);
      std::size_t kept = 0, total = 0;
      for (std::size_t d = 0; d < docs.size(); ++d) {
        kept += out[d].compressed.selected_word_indices.size();
        total += docs[d].word_count();
        EXPECT_EQ(out[d].sentences.empty() ? 0 : out[d].sentences.back().word_end, docs[d].word_count());
      }
      if (mode == FilterMode::Dynamic) EXPECT_EQ(kept, budget_words(total, config.tau));
      EXPECT_LE(kept, budget_words(total, config.tau));
    }
  }
}

TEST(Pipeline, SingleDocumentContextReducesToDocument) {
  std::mt19937_64 rng(6);
  ReferenceProvider provider{ReferenceModelConfig{}};
  for (auto scope : {BudgetScope::PerDocument, BudgetScope::Global}) {
    for (auto mode : {FilterMode::Phrase, FilterMode::Sentence, FilterMode::Dynamic}) {
      CompressionConfig config;
      config.scope = scope;
      config.mode = mode;
      config.tau = 0.4;
      const auto docs = random_docs(rng, 1, 8, 25);
      const auto ctx = compress_context(docs, kQuery, kInstruction, config, provider);
      const auto one = compress_document(docs[0], kQuery, kInstruction, config, provider);
      ASSERT_EQ(ctx.size(), 1u);
      EXPECT_EQ(ctx[0].compressed.selected_word_indices, one.compressed.selected_word_indices);
      EXPECT_EQ(ctx[0].compressed.rendered, one.compressed.rendered);
    }
  }
}

TEST(Pipeline, PerDocumentIsolation) {
  std::mt19937_64 rng(7);
  ReferenceProvider provider{ReferenceModelConfig{}};
  for (int iter = 0; iter < 10; ++iter) {
    auto docs = random_docs(rng, 4, 3, 20);
    CompressionConfig config;
    config.mode = static_cast<FilterMode>(iter % 3);
    const auto before = compress_context(docs, kQuery, kInstruction, config, provider);
    const std::size_t j = rng() % docs.size();
    docs[j] = Document::from_text(docs[j].id, random_text(rng, 3 + rng() % 20));
    const auto after = compress_context(docs, kQuery, kInstruction, config, provider);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (i == j) continue;
      EXPECT_EQ(before[i].compressed.rendered, after[i].compressed.rendered);
      EXPECT_EQ(before[i].alpha3, after[i].alpha3);
    }
  }
}

TEST(Pipeline, PhraseModeKeptDominatesDropped) {
  std::mt19937_64 rng(8);
  ReferenceProvider provider{ReferenceModelConfig{}};
  for (int iter = 0; iter < 20; ++iter) {
    const auto doc = Document::from_text("d", random_text(rng, 2 + rng() % 40));
    CompressionConfig config;
    config.tau = 0.3;
    const auto out = compress_document(doc, kQuery, kInstruction, config, provider);
    double kept_min = 2.0, dropped_max = -1.0;
    std::size_t last_kept = 0, first_dropped = doc.word_count();
    for (std::size_t w = 0; w < doc.word_count(); ++w) {
      if (out.selected[w]) {
        kept_min = std::min(kept_min, out.alpha3[w]);
      } else {
        dropped_max = std::max(dropped_max, out.alpha3[w]);
      }
    }
    EXPECT_GE(kept_min, dropped_max);
    // On exact ties the earlier word wins.
    for (std::size_t w = 0; w < doc.word_count(); ++w) {
      if (out.selected[w] && out.alpha3[w] == dropped_max) last_kept = w;
      if (!out.selected[w] && out.alpha3[w] == kept_min) first_dropped = std::min(first_dropped, w);
    }
    if (kept_min == dropped_max) EXPECT_LT(last_kept, first_dropped);
  }
}

TEST(Pipeline, ParallelMatchesSequential) {
  std::mt19937_64 rng(9);
  const auto docs = random_docs(rng, 12, 3, 30);
  ReferenceProvider provider{ReferenceModelConfig{}};
  CompressionConfig config;
  config.mode = FilterMode::Dynamic;
  const auto seq = compress_context(docs, kQuery, kInstruction, config, provider);
  config.parallelism = 4;
  const auto par = compress_context(docs, kQuery, kInstruction, config, provider);
  for (std::size_t i = 0; i < docs.size(); ++i) EXPECT_EQ(seq[i].compressed.rendered, par[i].compressed.rendered);
}

TEST(Pipeline, ErrorsNameTheDocument) {
  CountingProvider provider;
  CompressionConfig config;
  std::vector<Document> docs = {Document::from_text("fine", "some words here"),
                                Document::from_text("blank", "   ")};
  try {
    compress_context(docs, kQuery, kInstruction, config, provider);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
    EXPECT_NE(std::string(e.what()).find("blank"), std::string::npos) << e.what();
  }
  EXPECT_THROW(compress_context({}, kQuery, kInstruction, config, provider), Error);
  config.tau = 0.0;
  EXPECT_THROW(compress_context(docs, kQuery, kInstruction, config, provider), Error);
}

TEST(Pipeline, ParsesModesAndScopes) {
  EXPECT_EQ(parse_filter_mode("dynamic"), FilterMode::Dynamic);
  EXPECT_EQ(parse_budget_scope("per-doc"), BudgetScope::PerDocument);
  EXPECT_EQ(parse_budget_scope("per_document"), BudgetScope::PerDocument);
  EXPECT_EQ(parse_budget_scope("global"), BudgetScope::Global);
  EXPECT_THROW(parse_filter_mode("words"), Error);
  EXPECT_THROW(parse_budget_scope("all"), Error);
}

}  // namespace
}  // namespace qgc
