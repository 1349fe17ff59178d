#include <spdlog/spdlog.h>

#include "cpc/error.hpp"
#include "cpc/metrics.hpp"

namespace cpc::metrics {

int delta_containment(std::string_view cognitive, std::string_view perceptual) {
  const std::string c = normalize(cognitive);
  if (c.empty()) {
    spdlog::warn("empty cognitive response counts as inconsistent");
    return 0;
  }
  return normalize(perceptual).find(c) != std::string::npos ? 1 : 0;
}

double cp_consistency(std::span<const ResponsePair> pairs) {
  if (pairs.empty()) throw EmptyInput("cp_consistency needs at least one pair");
  std::size_t consistent = 0;
  for (const auto& p : pairs) consistent += static_cast<std::size_t>(delta_containment(p.cognitive_response, p.perceptual_response));
  return static_cast<double>(consistent) / static_cast<double>(pairs.size());
}

IdealizedConsistency idealized_cp_consistency(std::span<const GroundedPair> pairs) {
  IdealizedConsistency out;
  out.total = pairs.size();
  std::size_t consistent = 0;
  for (const auto& p : pairs) {
    if (anls_similarity(p.responses.cognitive_response, p.ground_truth) < kAnlsThreshold ||
        anls_similarity(p.responses.perceptual_response, p.ground_truth) < kAnlsThreshold) {
      continue;
    }
    ++out.kept;
    consistent += static_cast<std::size_t>(
        delta_containment(p.responses.cognitive_response, p.responses.perceptual_response));
  }
  if (out.kept > 0) out.value = static_cast<double>(consistent) / static_cast<double>(out.kept);
  return out;
}

}  // namespace cpc::metrics
