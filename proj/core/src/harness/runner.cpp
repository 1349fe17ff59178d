#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "cpc/error.hpp"
#include "cpc/harness.hpp"

namespace cpc::harness {

std::string_view to_string(PairStatus s) { return s == PairStatus::ok ? "ok" : "failed"; }

RunResult run_pairs(ChatEndpoint& endpoint, const std::vector<pairgen::EvalPair>& pairs, ResponseCache& cache,
                    const RunOptions& options) {
  if (pairs.empty()) throw EmptyInput("no pairs to evaluate");
  RunResult result;
  result.responses.resize(pairs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> hits{0};

  auto answer = [&](const pairgen::EvalPair& pair, Task task) {
    const std::string& question = task == Task::cognitive ? pair.cognitive_query : pair.perceptual_query;
    auto ex = Exchange::make(pair, task, prompt_for(pair.dataset, task, question, options.profile));
    const std::string key = cache_key(options.model_name, ex.prompt(), options.image_root / ex.image());
    std::string response;
    if (auto hit = cache.get(key)) {
      ++hits;
      response = *hit;
    } else {
      ++calls;
      ex = ask(endpoint, options.retry, std::move(ex), options.image_root);
      response = ex.response;
      cache.put(key, response, options.model_name);
    }
    if (options.extractor != nullptr) response = options.extractor->apply(pair.dataset, response);
    return response;
  };

  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      const auto& pair = pairs[i];
      PairResponse& out = result.responses[i];
      out.responses.pair_id = pair.pair_id;
      try {
        out.responses.cognitive_response = answer(pair, Task::cognitive);
        out.responses.perceptual_response = answer(pair, Task::perceptual);
        out.status = PairStatus::ok;
      } catch (const std::exception& e) {
        out.responses.cognitive_response.clear();
        out.responses.perceptual_response.clear();
        out.status = PairStatus::failed;
        out.error = e.what();
        spdlog::warn("{}: {}", pair.pair_id, e.what());
      }
    }
  };

  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.max_parallel)),
                                               pairs.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_workers; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  result.endpoint_calls = calls;
  result.cache_hits = hits;
  result.n_failed = static_cast<std::size_t>(std::count_if(
      result.responses.begin(), result.responses.end(), [](const auto& r) { return r.status == PairStatus::failed; }));
  return result;
}

std::string to_response_line(const PairResponse& r) {
  nlohmann::ordered_json j;
  j["pair_id"] = r.responses.pair_id;
  j["cognitive_response"] = r.responses.cognitive_response;
  j["perceptual_response"] = r.responses.perceptual_response;
  j["status"] = to_string(r.status);
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

void write_responses(const std::vector<PairResponse>& responses, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  for (const auto& r : responses) out << to_response_line(r) << '\n';
  if (!out) throw IoFailure("write failed: " + path.string());
}

std::vector<PairResponse> read_responses(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::vector<PairResponse> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PairResponse r;
      r.responses.pair_id = j.at("pair_id").get<std::string>();
      r.responses.cognitive_response = j.at("cognitive_response").get<std::string>();
      r.responses.perceptual_response = j.at("perceptual_response").get<std::string>();
      const auto status = j.at("status").get<std::string>();
      if (status != "ok" && status != "failed") throw MalformedRecord(n, "unknown status '" + status + "'");
      r.status = status == "ok" ? PairStatus::ok : PairStatus::failed;
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRecord(n, e.what());
    }
  }
  return out;
}

}  // namespace cpc::harness
