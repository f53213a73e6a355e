#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <semaphore>
#include <string>

#include <json.hpp>

namespace qgc {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

// One OpenAI-compatible chat completion. Greedy decoding unless the caller
// sets a temperature explicitly.
struct GenerationRequest {
  std::string endpoint;  // full URL; a bare origin gets /v1/chat/completions
  std::string model;
  std::string prompt;
  std::optional<std::string> system;
  double temperature = 0.0;
  int max_tokens = 256;
  std::chrono::milliseconds timeout{60000};
  std::optional<std::string> bearer_token;

  void validate() const;
};

nlohmann::json build_chat_body(const GenerationRequest& req);

/// choices[0].message.content; throws Provider on unexpected shapes.
std::string parse_chat_response(const std::string& body);

class GenerationClient {
 public:
  explicit GenerationClient(RetryPolicy retry = {}, std::size_t max_in_flight = 4);

  GenerationClient(const GenerationClient&) = delete;
  GenerationClient& operator=(const GenerationClient&) = delete;

  /// Retries connection failures, timeouts, 429 and 5xx with exponential
  /// backoff. Throws Timeout when the last attempt timed out, Provider
  /// otherwise. Thread-safe; at most max_in_flight requests run at once.
  std::string generate(const GenerationRequest& req);

 private:
  RetryPolicy retry_;
  std::counting_semaphore<1024> in_flight_;
};

std::string generate_remote(const GenerationRequest& req, const RetryPolicy& retry = {});

}  // namespace qgc
