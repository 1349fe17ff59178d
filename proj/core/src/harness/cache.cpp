#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <ctime>
#include <fstream>

#include "cpc/error.hpp"
#include "cpc/harness.hpp"

namespace cpc::harness {
namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_, std::ios::binary);
  if (!in) return;  // created on first put
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      entries_.insert_or_assign(j.at("key").get<std::string>(), j.at("response").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      // A torn final line from an interrupted run is skipped, not fatal.
      spdlog::warn("{}:{}: skipping cache line: {}", file_.string(), n, e.what());
    }
  }
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& key, const std::string& response, const std::string& model) {
  std::unique_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it != entries_.end() && it->second == response) return;
  entries_.insert_or_assign(key, response);
  if (file_.empty()) return;
  nlohmann::ordered_json j;
  j["key"] = key;
  j["response"] = response;
  j["model"] = model;
  j["timestamp"] = utc_timestamp();
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  out << j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  out.flush();
  if (!out) throw IoFailure("cannot append to " + file_.string());
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace cpc::harness
