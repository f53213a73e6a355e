#include "qgc/generation.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "http_util.hpp"
#include "qgc/error.hpp"

namespace qgc {

using nlohmann::json;

void GenerationRequest::validate() const {
  detail::split_url(endpoint);
  if (!(temperature >= 0.0)) throw Error(ErrorKind::Config, "temperature must be >= 0");
  if (max_tokens <= 0) throw Error(ErrorKind::Config, "max_tokens must be positive");
  if (timeout.count() <= 0) throw Error(ErrorKind::Config, "timeout must be positive");
}

json build_chat_body(const GenerationRequest& req) {
  json messages = json::array();
  if (req.system) messages.push_back({{"role", "system"}, {"content", *req.system}});
  messages.push_back({{"role", "user"}, {"content", req.prompt}});
  return json{{"model", req.model},
              {"messages", std::move(messages)},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens}};
}

std::string parse_chat_response(const std::string& body) {
  const json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorKind::Provider, "generation response is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Provider, "generation response lacks choices[0].message.content");
  }
}

GenerationClient::GenerationClient(RetryPolicy retry, std::size_t max_in_flight)
    : retry_(retry),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(max_in_flight, 1, 1024))) {
  if (retry_.max_attempts < 1) throw Error(ErrorKind::Config, "max_attempts must be at least 1");
}

std::string GenerationClient::generate(const GenerationRequest& req) {
  req.validate();
  auto parts = detail::split_url(req.endpoint);
  if (parts.path == "/") parts.path = "/v1/chat/completions";
  const std::string body = build_chat_body(req).dump();

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  httplib::Client client(parts.origin);
  client.set_connection_timeout(req.timeout);
  client.set_read_timeout(req.timeout);
  client.set_write_timeout(req.timeout);
  if (req.bearer_token) client.set_bearer_token_auth(*req.bearer_token);

  std::string last_failure;
  bool last_was_timeout = false;
  auto backoff = retry_.initial_backoff;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(parts.path, body, "application/json");
    if (res && res->status == 200) return parse_chat_response(res->body);

    bool transient = true;
    if (!res) {
      const auto elapsed = std::chrono::steady_clock::now() - started;
      last_was_timeout = res.error() == httplib::Error::ConnectionTimeout ||
                         (res.error() == httplib::Error::Read && elapsed >= req.timeout * 9 / 10);
      last_failure = last_was_timeout ? "timed out" : httplib::to_string(res.error());
    } else {
      last_was_timeout = false;
      last_failure = "HTTP " + std::to_string(res->status);
      transient = res->status == 429 || res->status >= 500;
    }
    if (!transient) {
      throw Error(ErrorKind::Provider, "generation failed after " + std::to_string(attempt) +
                                           " attempt(s): " + last_failure);
    }
    if (attempt < retry_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(std::llround(static_cast<double>(backoff.count()) * retry_.multiplier)));
    }
  }
  throw Error(last_was_timeout ? ErrorKind::Timeout : ErrorKind::Provider,
              "generation failed after " + std::to_string(retry_.max_attempts) +
                  " attempts: " + last_failure);
}

std::string generate_remote(const GenerationRequest& req, const RetryPolicy& retry) {
  GenerationClient client(retry, 1);
  return client.generate(req);
}

}  // namespace qgc
