#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "qgc/attention.hpp"
#include "qgc/error.hpp"

namespace qgc {

using nlohmann::json;

namespace {

[[noreturn]] void reject(const std::string& why) {
  throw Error(ErrorKind::Validation, "invalid attention record: " + why);
}

const json& require(const json& j, const char* key) {
  if (!j.is_object()) reject("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) reject(std::string("missing field '") + key + "'");
  return *it;
}

std::size_t require_index(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_unsigned()) reject(std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) reject(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

bool is_lower_hex(std::string_view s) {
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

void validate_record(const AttentionRecord& record, double sum_tolerance) {
  const std::size_t n = record.tokens.size();
  if (n == 0) reject("no tokens");
  if (record.trigger_attention.size() != n) {
    reject("trigger_attention has " + std::to_string(record.trigger_attention.size()) +
           " entries for " + std::to_string(n) + " tokens");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Token& t = record.tokens[i];
    if (t.char_start > t.char_end) reject("token " + std::to_string(i) + " has cs > ce");
    if (i > 0 && t.char_start < record.tokens[i - 1].char_start) {
      reject("token " + std::to_string(i) + " starts before its predecessor");
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = record.trigger_attention[i];
    if (!std::isfinite(a) || a < 0.0 || a > 1.0 + sum_tolerance) {
      reject("attention entry " + std::to_string(i) + " outside [0, 1]");
    }
    sum += a;
  }
  if (std::abs(sum - 1.0) > sum_tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "trigger_attention sums to " << sum << ", expected 1 +/- " << sum_tolerance;
    reject(os.str());
  }
  const auto& span = record.context_tokens;
  if (!(span.start < span.end && span.end <= n)) {
    reject("context span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
           ") invalid for " + std::to_string(n) + " tokens");
  }
  if (record.prompt_sha256.size() != 64 || !is_lower_hex(record.prompt_sha256)) {
    reject("prompt_sha256 must be 64 lowercase hex characters");
  }
}

json record_to_json(const AttentionRecord& record) {
  json tokens = json::array();
  for (const auto& t : record.tokens) {
    tokens.push_back({{"s", t.surface}, {"cs", t.char_start}, {"ce", t.char_end}});
  }
  return json{{"provider_id", record.provider_id},
              {"layer_policy", record.layer_policy},
              {"prompt_sha256", record.prompt_sha256},
              {"tokens", std::move(tokens)},
              {"trigger_attention", record.trigger_attention},
              {"doc_start", record.context_tokens.start},
              {"doc_end", record.context_tokens.end}};
}

AttentionRecord record_from_json(const json& j) {
  AttentionRecord record;
  record.provider_id = require_string(j, "provider_id");
  record.layer_policy = require_string(j, "layer_policy");
  record.prompt_sha256 = require_string(j, "prompt_sha256");

  const json& tokens = require(j, "tokens");
  if (!tokens.is_array()) reject("'tokens' must be an array");
  for (const auto& t : tokens) {
    Token tok;
    tok.index = record.tokens.size();
    tok.surface = require_string(t, "s");
    tok.char_start = require_index(t, "cs");
    tok.char_end = require_index(t, "ce");
    record.tokens.push_back(std::move(tok));
  }

  const json& attn = require(j, "trigger_attention");
  if (!attn.is_array()) reject("'trigger_attention' must be an array");
  for (const auto& a : attn) {
    if (!a.is_number()) reject("'trigger_attention' entries must be numbers");
    record.trigger_attention.push_back(a.get<double>());
  }
  record.context_tokens.start = require_index(j, "doc_start");
  record.context_tokens.end = require_index(j, "doc_end");

  validate_record(record, kLoaderSumTolerance);
  return record;
}

AttentionRecord load_attention_record(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Provider, "cannot open attention record '" + path.string() + "'");
  }
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) reject("'" + path.string() + "' is not valid JSON");
  try {
    return record_from_json(j);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void save_attention_record(const AttentionRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Validation, "cannot write '" + path.string() + "'");
  out << record_to_json(record).dump() << '\n';
}

void check_record_matches(const AttentionRecord& record, const FilledPrompt& prompt) {
  if (record.prompt_sha256 != sha256_hex(prompt.text)) {
    reject("prompt_sha256 does not match the filled prompt");
  }
  for (const auto& t : record.tokens) {
    if (t.char_end > prompt.text.size()) {
      reject("token offsets exceed prompt length " + std::to_string(prompt.text.size()));
    }
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Validation, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

TokenSpan context_token_span(const std::vector<Token>& tokens, CharSpan span) {
  TokenSpan out{tokens.size(), 0};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.char_start < span.end && span.start < t.char_end) {
      out.start = std::min(out.start, i);
      out.end = i + 1;
    }
  }
  if (out.end == 0) {
    throw Error(ErrorKind::Alignment, "no token overlaps the context span");
  }
  return out;
}

}  // namespace qgc
