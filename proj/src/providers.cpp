#include <httplib.h>

#include "http_util.hpp"
#include "qgc/attention.hpp"
#include "qgc/error.hpp"

namespace qgc {

using nlohmann::json;

AttentionRecord AttentionProvider::request(const FilledPrompt& prompt) {
  AttentionRecord record;
  if (concurrent_safe()) {
    record = trigger_attention(prompt);
  } else {
    std::lock_guard lock(call_mutex_);
    record = trigger_attention(prompt);
  }
  try {
    validate_record(record, kProviderSumTolerance);
  } catch (const Error& e) {
    throw Error(ErrorKind::Provider, id() + ": " + e.what());
  }
  return record;
}

ReferenceProvider::ReferenceProvider(ReferenceModelConfig config) : model_(config) {}

std::string ReferenceProvider::id() const {
  const auto& c = model_.config();
  return "ref:seed=" + std::to_string(c.seed) + ",vocab=" + std::to_string(c.vocab_size) +
         ",dim=" + std::to_string(c.embed_dim) + ",heads=" + std::to_string(c.head_count);
}

AttentionRecord ReferenceProvider::trigger_attention(const FilledPrompt& prompt) {
  AttentionRecord record;
  record.tokens = ref_tokenize(prompt.text);
  locate_trigger(prompt, record.tokens);

  std::vector<std::uint32_t> ids;
  ids.reserve(record.tokens.size());
  for (const auto& t : record.tokens) ids.push_back(ref_token_id(t.surface, model_.config().vocab_size));

  record.trigger_attention = model_.trigger_attention(ids);
  record.context_tokens = context_token_span(record.tokens, prompt.context_char_span);
  record.provider_id = id();
  record.layer_policy = "single-layer/head-mean";
  record.prompt_sha256 = sha256_hex(prompt.text);
  return record;
}

RecordedProvider::RecordedProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path RecordedProvider::path_for(const FilledPrompt& prompt) const {
  return dir_ / (sha256_hex(prompt.text) + ".json");
}

AttentionRecord RecordedProvider::trigger_attention(const FilledPrompt& prompt) {
  const auto path = path_for(prompt);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorKind::Provider, id() + ": no recorded attention at '" + path.string() + "'");
  }
  AttentionRecord record = load_attention_record(path);
  check_record_matches(record, prompt);
  return record;
}

RemoteProvider::RemoteProvider(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {
  detail::split_url(url_);
}

AttentionRecord RemoteProvider::trigger_attention(const FilledPrompt& prompt) {
  const auto parts = detail::split_url(url_);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  const json body{{"prompt", prompt.text},
                  {"prompt_sha256", sha256_hex(prompt.text)},
                  {"context_char_span", {prompt.context_char_span.start, prompt.context_char_span.end}}};
  auto res = client.Post(parts.path, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorKind::Provider, id() + ": request failed (" + httplib::to_string(res.error()) + ")");
  }
  if (res->status != 200) {
    throw Error(ErrorKind::Provider, id() + ": HTTP " + std::to_string(res->status));
  }
  json j = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorKind::Provider, id() + ": response is not JSON");
  try {
    AttentionRecord record = record_from_json(j);
    check_record_matches(record, prompt);
    return record;
  } catch (const Error& e) {
    throw Error(ErrorKind::Provider, id() + ": " + e.what());
  }
}

std::unique_ptr<AttentionProvider> make_provider(std::string_view name,
                                                 const ReferenceModelConfig& ref_config) {
  if (name == "ref") return std::make_unique<ReferenceProvider>(ref_config);
  if (name.starts_with("recorded:") && name.size() > 9) {
    return std::make_unique<RecordedProvider>(std::string(name.substr(9)));
  }
  if (name.starts_with("remote:") && name.size() > 7) {
    return std::make_unique<RemoteProvider>(std::string(name.substr(7)));
  }
  throw Error(ErrorKind::Config,
              "unknown provider '" + std::string(name) + "' (expected ref, recorded:DIR or remote:URL)");
}

}  // namespace qgc
