#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "cpc/error.hpp"
#include "cpc/metrics.hpp"

namespace cpc::metrics {

double anls_score(std::string_view response, std::span<const std::string> truths) {
  if (truths.empty()) throw EmptyTruths();
  double best = 0.0;
  for (const auto& truth : truths) {
    const double sim = anls_similarity(response, truth);
    if (sim >= kAnlsThreshold) best = std::max(best, sim);
  }
  return best;
}

std::optional<double> parse_relaxed_number(std::string_view s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char c : s) {
    if (c == ',' || c == '%') continue;
    cleaned.push_back(c);
  }
  auto first = cleaned.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return std::nullopt;
  auto last = cleaned.find_last_not_of(" \t\r\n");
  std::string_view body(cleaned.data() + first, last - first + 1);
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  if (body.empty()) return std::nullopt;

  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc() || ptr != body.data() + body.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

int relaxed_accuracy(std::string_view response, std::string_view truth) {
  const auto r = parse_relaxed_number(response);
  const auto t = parse_relaxed_number(truth);
  if (r && t) {
    if (*t == 0.0) return *r == 0.0 ? 1 : 0;
    return std::fabs(*r - *t) <= 0.05 * std::fabs(*t) ? 1 : 0;
  }
  return normalize(response) == normalize(truth) ? 1 : 0;
}

double field_f1(std::span<const Field> predictions, std::span<const Field> truths) {
  std::unordered_map<std::string, std::string> truth_by_key;
  for (const auto& [key, value] : truths) {
    if (!truth_by_key.emplace(key, normalize(value)).second) {
      throw std::invalid_argument("duplicate truth key: " + key);
    }
  }
  std::unordered_map<std::string, bool> seen;
  std::size_t hits = 0;
  for (const auto& [key, value] : predictions) {
    if (!seen.emplace(key, true).second) throw std::invalid_argument("duplicate prediction key: " + key);
    auto it = truth_by_key.find(key);
    if (it != truth_by_key.end() && it->second == normalize(value)) ++hits;
  }
  if (predictions.empty() && truths.empty()) return 1.0;
  if (hits == 0) return 0.0;
  const double precision = static_cast<double>(hits) / static_cast<double>(predictions.size());
  const double recall = static_cast<double>(hits) / static_cast<double>(truths.size());
  return 2.0 * precision * recall / (precision + recall);
}

double macro_average(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("macro_average needs at least one value");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace cpc::metrics
