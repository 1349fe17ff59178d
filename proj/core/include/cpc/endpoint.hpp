#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace cpc {

// A chat-with-image model. complete() makes exactly one attempt and reports
// failures through the EndpointFailure hierarchy (TransientFailure, Timeout,
// AuthFailure). Implementations must be safe to call from several threads.
class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual std::string complete(std::string_view prompt,
                               std::span<const std::filesystem::path> images) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{8000};

  std::chrono::milliseconds delay_before(int attempt) const;  // attempt >= 2
};

struct AttemptLog {
  int attempts = 0;
  std::string last_error;
};

// Calls `endpoint` with exponential backoff on TransientFailure. AuthFailure
// and other EndpointFailures propagate immediately. Exhausted retries throw
// EndpointFailure (or Timeout when the last attempt timed out).
std::string complete_with_retries(ChatEndpoint& endpoint, const RetryPolicy& policy,
                                  std::string_view prompt,
                                  std::span<const std::filesystem::path> images,
                                  AttemptLog* log = nullptr);

// Decorator applying complete_with_retries to every call.
class RetryingEndpoint final : public ChatEndpoint {
 public:
  RetryingEndpoint(ChatEndpoint& inner, RetryPolicy policy) : inner_(inner), policy_(policy) {}
  std::string complete(std::string_view prompt,
                       std::span<const std::filesystem::path> images) override;

 private:
  ChatEndpoint& inner_;
  RetryPolicy policy_;
};

// Sampling is pinned: temperature 0 is sent on every request and cannot be raised.
struct EndpointConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1
  std::string model_name;
  std::string api_key;   // taken from the environment by callers, never a flag
  int max_parallel = 4;
  std::chrono::seconds timeout{120};

  static constexpr double kTemperature = 0.0;

  // Throws std::invalid_argument describing the first problem.
  void validate() const;
};

// OpenAI-style POST {base_url}/chat/completions with one user message holding
// a text part and base64 PNG image_url parts.
class HttpChatEndpoint final : public ChatEndpoint {
 public:
  explicit HttpChatEndpoint(EndpointConfig config);
  std::string complete(std::string_view prompt,
                       std::span<const std::filesystem::path> images) override;

  const EndpointConfig& config() const { return config_; }

  // Request body as sent on the wire; exposed for tests.
  static std::string request_body(const EndpointConfig& config, std::string_view prompt,
                                  std::span<const std::filesystem::path> images);
  // Extracts choices[0].message.content; throws EndpointFailure.
  static std::string parse_response(std::string_view body);

 private:
  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace cpc
