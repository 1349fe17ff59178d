#include "cpc/hash.hpp"
#include "cpc/harness.hpp"

namespace cpc::harness {

Exchange Exchange::make(const pairgen::EvalPair& pair, Task task, std::string prompt) {
  Exchange ex;
  ex.pair_id_ = pair.pair_id;
  ex.task_ = task;
  ex.prompt_ = std::move(prompt);
  ex.image_ = task == Task::perceptual ? pair.boxed_image : pair.plain_image;
  return ex;
}

Exchange ask(ChatEndpoint& endpoint, const RetryPolicy& policy, Exchange exchange,
             const std::filesystem::path& image_root) {
  const std::filesystem::path image = image_root / exchange.image();
  AttemptLog log;
  const auto start = std::chrono::steady_clock::now();
  const std::string raw = complete_with_retries(endpoint, policy, exchange.prompt(),
                                                std::span<const std::filesystem::path>(&image, 1), &log);
  exchange.latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  exchange.attempts = log.attempts;
  exchange.cached = false;
  exchange.response = trim(raw);
  return exchange;
}

std::string cache_key(std::string_view model_name, std::string_view prompt, const std::filesystem::path& image) {
  const std::string bytes = read_file_bytes(image);
  Sha256 h;
  h.update_field("cpc-cache-v1").update_field(model_name).update_field(prompt).update_field(bytes);
  return h.hex_digest();
}

}  // namespace cpc::harness
