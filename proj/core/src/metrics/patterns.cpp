#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>

#include "cpc/metrics.hpp"

namespace cpc::metrics {
namespace {

constexpr std::array<std::string_view, 5> kPatternNames = {
    "consistent", "p1_char_error", "p2_cognitive_bias", "p3_limited_cognition", "other"};

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto j = s.find(' ', i);
    const auto end = j == std::string_view::npos ? s.size() : j;
    if (end > i) words.push_back(s.substr(i, end - i));
    i = end + 1;
  }
  return words;
}

// Words of `cognitive` left over after a longest-common-subsequence
// alignment against the words of `perceptual`.
std::vector<std::string_view> unmatched_words(std::string_view cognitive, std::string_view perceptual) {
  const auto c = split_words(cognitive);
  const auto p = split_words(perceptual);
  std::vector<std::vector<std::size_t>> lcs(c.size() + 1, std::vector<std::size_t>(p.size() + 1, 0));
  for (std::size_t i = c.size(); i-- > 0;) {
    for (std::size_t j = p.size(); j-- > 0;) {
      lcs[i][j] = c[i] == p[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  std::vector<std::string_view> left;
  std::size_t i = 0, j = 0;
  while (i < c.size()) {
    if (j < p.size() && c[i] == p[j]) {
      ++i;
      ++j;
    } else if (j < p.size() && lcs[i][j + 1] >= lcs[i + 1][j]) {
      ++j;
    } else {
      left.push_back(c[i]);
      ++i;
    }
  }
  return left;
}

}  // namespace

std::string_view to_string(ConflictPattern p) { return kPatternNames[static_cast<std::size_t>(p)]; }

std::optional<ConflictPattern> conflict_pattern_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kPatternNames.size(); ++i) {
    if (kPatternNames[i] == s) return static_cast<ConflictPattern>(i);
  }
  return std::nullopt;
}

std::vector<std::string> PatternThresholds::default_common_words() {
  return {"a",     "about", "after", "all",   "also",  "an",    "and",   "any",   "are",   "as",
          "at",    "be",    "been",  "but",   "by",    "can",   "could", "did",   "do",    "does",
          "each",  "for",   "from",  "had",   "has",   "have",  "he",    "her",   "him",   "his",
          "how",   "i",     "if",    "in",    "into",  "is",    "it",    "its",   "just",  "may",
          "me",    "more",  "most",  "my",    "new",   "no",    "not",   "now",   "of",    "off",
          "on",    "one",   "only",  "or",    "other", "our",   "out",   "over",  "per",   "same",
          "she",   "so",    "some",  "such",  "than",  "that",  "the",   "their", "them",  "then",
          "there", "these", "they",  "this",  "those", "to",    "too",   "two",   "up",    "us",
          "very",  "was",   "way",   "we",    "were",  "what",  "when",  "where", "which", "who",
          "why",   "will",  "with",  "would", "you",   "your",  "yes",   "here",  "under", "upon"};
}

ConflictPattern classify_pattern(const ResponsePair& pair, std::string_view ground_truth,
                                 const PatternThresholds& thresholds) {
  if (delta_containment(pair.cognitive_response, pair.perceptual_response) == 1) {
    return ConflictPattern::consistent;
  }

  const double sim_c = anls_similarity(pair.cognitive_response, ground_truth);
  const double sim_p = anls_similarity(pair.perceptual_response, ground_truth);
  if (sim_p >= thresholds.similarity && sim_c < thresholds.similarity) {
    return ConflictPattern::p3_limited_cognition;
  }

  const bool both_close = sim_c >= thresholds.similarity && sim_p >= thresholds.similarity;
  const std::string norm_c = normalize(pair.cognitive_response);
  const std::string norm_p = normalize(pair.perceptual_response);
  const std::u32string c = to_scalars(norm_c);
  const std::size_t distance = substring_distance(c, to_scalars(norm_p));
  const auto budget = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(thresholds.char_budget_ratio * static_cast<double>(c.size()))));

  if (distance > 0 && distance <= budget) {
    // Cognitive bias needs an accurate reading of the box: y_P holds GT.
    if (both_close && delta_containment(ground_truth, pair.perceptual_response) == 1) {
      const auto swapped = unmatched_words(norm_c, norm_p);
      const std::unordered_set<std::string_view> lexicon(thresholds.common_words.begin(),
                                                         thresholds.common_words.end());
      const bool word_choice = !swapped.empty() && std::all_of(swapped.begin(), swapped.end(), [&](auto w) {
        return lexicon.count(w) > 0;
      });
      if (word_choice) return ConflictPattern::p2_cognitive_bias;
    }
    return ConflictPattern::p1_char_error;
  }
  if (both_close) return ConflictPattern::p2_cognitive_bias;
  return ConflictPattern::other;
}

}  // namespace cpc::metrics
