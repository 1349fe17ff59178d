#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "cpc/endpoint.hpp"
#include "cpc/error.hpp"

namespace cpc {

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  if (attempt <= 1) return std::chrono::milliseconds{0};
  const double ms = static_cast<double>(initial_delay.count()) * std::pow(multiplier, attempt - 2);
  const double capped = std::min(ms, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds{static_cast<std::int64_t>(capped)};
}

std::string complete_with_retries(ChatEndpoint& endpoint, const RetryPolicy& policy, std::string_view prompt,
                                  std::span<const std::filesystem::path> images, AttemptLog* log) {
  const int max_attempts = std::max(1, policy.max_attempts);
  bool last_timed_out = false;
  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(policy.delay_before(attempt));
    if (log) log->attempts = attempt;
    try {
      return endpoint.complete(prompt, images);
    } catch (const Timeout& e) {
      last_timed_out = true;
      last_error = e.what();
    } catch (const TransientFailure& e) {
      last_timed_out = false;
      last_error = e.what();
    } catch (const EndpointFailure& e) {
      if (log) log->last_error = e.what();
      throw;
    }
    if (log) log->last_error = last_error;
    spdlog::debug("attempt {}/{} failed: {}", attempt, max_attempts, last_error);
  }
  const std::string msg = "gave up after " + std::to_string(max_attempts) + " attempts: " + last_error;
  if (last_timed_out) throw Timeout(msg);
  throw EndpointFailure(msg);
}

std::string RetryingEndpoint::complete(std::string_view prompt, std::span<const std::filesystem::path> images) {
  return complete_with_retries(inner_, policy_, prompt, images);
}

void EndpointConfig::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw std::invalid_argument("base_url must start with http:// or https://: '" + base_url + "'");
  }
  if (model_name.empty()) throw std::invalid_argument("model name is empty");
  if (max_parallel < 1) throw std::invalid_argument("max_parallel must be positive");
  if (timeout.count() < 1) throw std::invalid_argument("timeout must be at least one second");
}

}  // namespace cpc
