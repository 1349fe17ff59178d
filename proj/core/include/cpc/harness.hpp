#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cpc/corpus.hpp"
#include "cpc/endpoint.hpp"
#include "cpc/metrics.hpp"
#include "cpc/pairgen.hpp"

namespace cpc::harness {

enum class Task { cognitive, perceptual };
std::string_view to_string(Task t);

// closed: the dataset-specific instructions used for hosted models.
// sft: the bare question / red-box question the SFT data was built with.
enum class Profile { closed, sft };
std::string_view to_string(Profile p);
std::optional<Profile> profile_from_string(std::string_view s);

// Region-OCR instruction used for perceptual queries under the closed profile.
extern const std::string_view kRegionOcrPrompt;

// Throws UnknownDataset when the closed profile has no prompt for `dataset`.
std::string prompt_for(corpus::Dataset dataset, Task task, std::string_view question,
                       Profile profile = Profile::closed);

// Per-dataset answer extraction applied after trimming. A pattern's first
// capture group (or whole match) replaces the response when it matches.
class AnswerExtractor {
 public:
  AnswerExtractor() = default;
  void set(corpus::Dataset dataset, const std::string& pattern);
  std::string apply(corpus::Dataset dataset, std::string response) const;
  bool empty() const { return rules_.empty(); }

  // {"docvqa": "^Answer:\\s*(.*)$", ...}; throws std::invalid_argument.
  static AnswerExtractor from_json_file(const std::filesystem::path& path);

 private:
  std::map<corpus::Dataset, std::regex> rules_;
};

std::string trim(std::string_view s);

// One request/response. The image is chosen from the pair by task: the
// perceptual task always sees the boxed image and the cognitive task the
// plain one, so a mismatched exchange cannot be built.
class Exchange {
 public:
  static Exchange make(const pairgen::EvalPair& pair, Task task, std::string prompt);

  const std::string& pair_id() const { return pair_id_; }
  Task task() const { return task_; }
  const std::string& prompt() const { return prompt_; }
  const std::string& image() const { return image_; }

  std::string response;
  std::chrono::milliseconds latency{0};
  bool cached = false;
  int attempts = 0;

 private:
  Exchange() = default;
  std::string pair_id_;
  Task task_ = Task::cognitive;
  std::string prompt_;
  std::string image_;
};

// Sends one exchange with retries; returns it with the trimmed response.
// `image_root` resolves the exchange's relative image path.
Exchange ask(ChatEndpoint& endpoint, const RetryPolicy& policy, Exchange exchange,
             const std::filesystem::path& image_root = {});

// SHA-256 over (model, prompt bytes, image bytes), hex. Throws IoFailure.
std::string cache_key(std::string_view model_name, std::string_view prompt,
                      const std::filesystem::path& image);

// Append-only key -> response store, one JSON line per entry:
// {"key", "response", "model", "timestamp"}. Reads may run concurrently;
// appends are serialized and flushed.
class ResponseCache {
 public:
  ResponseCache() = default;  // in-memory only
  explicit ResponseCache(std::filesystem::path file);  // loads existing entries

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& response, const std::string& model);
  std::size_t size() const;

 private:
  std::filesystem::path file_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
};

enum class PairStatus { ok, failed };
std::string_view to_string(PairStatus s);

struct PairResponse {
  metrics::ResponsePair responses;
  PairStatus status = PairStatus::ok;
  std::string error;

  bool operator==(const PairResponse&) const = default;
};

struct RunOptions {
  std::string model_name;
  int max_parallel = 4;
  Profile profile = Profile::closed;
  RetryPolicy retry;
  std::filesystem::path image_root;  // manifest directory
  const AnswerExtractor* extractor = nullptr;
};

struct RunResult {
  std::vector<PairResponse> responses;  // input order
  std::size_t endpoint_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t n_failed = 0;
};

// Both exchanges per pair, cache first, with at most max_parallel pairs in
// flight. A failing pair is marked failed; the run continues.
// Throws EmptyInput for an empty pair list.
RunResult run_pairs(ChatEndpoint& endpoint, const std::vector<pairgen::EvalPair>& pairs,
                    ResponseCache& cache, const RunOptions& options);

// {"pair_id", "cognitive_response", "perceptual_response", "status"}
std::string to_response_line(const PairResponse& r);
void write_responses(const std::vector<PairResponse>& responses, const std::filesystem::path& path);
std::vector<PairResponse> read_responses(const std::filesystem::path& path);

}  // namespace cpc::harness
