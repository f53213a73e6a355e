#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qgc/prompt_template.hpp"
#include "qgc/text.hpp"

namespace qgc {

struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const { return end - start; }
  bool operator==(const TokenSpan&) const = default;
};

// The trigger token's attention over every prompt token, plus the token range
// of the inserted context. This is the unit exchanged with attention providers.
struct AttentionRecord {
  std::vector<Token> tokens;
  std::vector<double> trigger_attention;
  TokenSpan context_tokens;
  std::string provider_id;
  std::string layer_policy;
  std::string prompt_sha256;
};

inline constexpr double kProviderSumTolerance = 1e-6;
inline constexpr double kLoaderSumTolerance = 1e-4;

/// Throws Validation describing the first violated invariant.
void validate_record(const AttentionRecord& record, double sum_tolerance);

nlohmann::json record_to_json(const AttentionRecord& record);
/// Parses and validates at kLoaderSumTolerance.
AttentionRecord record_from_json(const nlohmann::json& j);

AttentionRecord load_attention_record(const std::filesystem::path& path);
void save_attention_record(const AttentionRecord& record, const std::filesystem::path& path);

/// Rejects records whose prompt hash or token offsets do not fit `prompt`.
void check_record_matches(const AttentionRecord& record, const FilledPrompt& prompt);

std::string sha256_hex(std::string_view data);

/// Tokens whose byte range intersects `span`. Throws Alignment if none do.
TokenSpan context_token_span(const std::vector<Token>& tokens, CharSpan span);

class AttentionProvider {
 public:
  virtual ~AttentionProvider() = default;

  virtual AttentionRecord trigger_attention(const FilledPrompt& prompt) = 0;
  virtual std::string id() const = 0;
  // True when trigger_attention may be called from several threads at once.
  virtual bool concurrent_safe() const { return false; }

  /// trigger_attention, serialized per instance unless concurrent_safe(), and
  /// checked against the record invariants.
  AttentionRecord request(const FilledPrompt& prompt);

 private:
  std::mutex call_mutex_;
};

// ---------------------------------------------------------------------------
// Reference micro-transformer

struct ReferenceModelConfig {
  std::size_t vocab_size = 4096;
  std::size_t embed_dim = 32;
  std::size_t head_count = 4;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Whitespace split, then runs longer than four code points are cut into
/// four-code-point chunks.
std::vector<Token> ref_tokenize(std::string_view text);

/// FNV-1a 64 of the surface bytes, modulo vocab_size.
std::uint32_t ref_token_id(std::string_view surface, std::size_t vocab_size);

// Single-layer multi-head causal self-attention with weights drawn from
// std::mt19937_64 (generator version kWeightsVersion) seeded by config.seed.
// Inputs are token embeddings plus sinusoidal positions. Each head scores
// q_p . k_i / sqrt(head_dim) for i <= p; rows are softmaxed per head and
// averaged over heads. Accumulation is sequential in index order.
class ReferenceModel {
 public:
  static constexpr std::string_view kWeightsVersion = "mt19937_64-uniform-v1";

  explicit ReferenceModel(ReferenceModelConfig config);

  const ReferenceModelConfig& config() const { return config_; }

  /// Attention row of `position` over all ids; entries after `position` are 0.
  std::vector<double> attention_row(std::span<const std::uint32_t> ids, std::size_t position) const;

  /// Row of the last position.
  std::vector<double> trigger_attention(std::span<const std::uint32_t> ids) const;

 private:
  std::vector<double> input_vector(std::uint32_t id, std::size_t position) const;

  ReferenceModelConfig config_;
  std::size_t head_dim_;
  std::vector<double> embeddings_;  // vocab_size x embed_dim
  std::vector<double> w_query_;     // head_count x head_dim x embed_dim
  std::vector<double> w_key_;       // head_count x head_dim x embed_dim
};

class ReferenceProvider final : public AttentionProvider {
 public:
  explicit ReferenceProvider(ReferenceModelConfig config);

  AttentionRecord trigger_attention(const FilledPrompt& prompt) override;
  std::string id() const override;
  bool concurrent_safe() const override { return true; }

  const ReferenceModel& model() const { return model_; }

 private:
  ReferenceModel model_;
};

// Reads <dir>/<prompt_sha256>.json for each prompt.
class RecordedProvider final : public AttentionProvider {
 public:
  explicit RecordedProvider(std::filesystem::path dir);

  AttentionRecord trigger_attention(const FilledPrompt& prompt) override;
  std::string id() const override { return "recorded:" + dir_.string(); }
  bool concurrent_safe() const override { return true; }

  std::filesystem::path path_for(const FilledPrompt& prompt) const;

 private:
  std::filesystem::path dir_;
};

// POSTs {"prompt", "prompt_sha256", "context_char_span"} to an HTTP endpoint
// that answers with an interchange record.
class RemoteProvider final : public AttentionProvider {
 public:
  explicit RemoteProvider(std::string url,
                          std::chrono::milliseconds timeout = std::chrono::seconds(60));

  AttentionRecord trigger_attention(const FilledPrompt& prompt) override;
  std::string id() const override { return "remote:" + url_; }
  bool concurrent_safe() const override { return true; }

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

/// "ref", "recorded:DIR" or "remote:URL".
std::unique_ptr<AttentionProvider> make_provider(std::string_view name,
                                                 const ReferenceModelConfig& ref_config);

}  // namespace qgc
