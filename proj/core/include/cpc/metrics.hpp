#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cpc::metrics {

// NFKC with case folding, whitespace runs collapsed to one space, trimmed.
// Every string comparison in the toolkit goes through this.
std::string normalize(std::string_view s);

// Decodes UTF-8 into Unicode scalar values. Invalid sequences become U+FFFD.
std::u32string to_scalars(std::string_view utf8);

// Unit-cost edit distance over Unicode scalar values of the raw inputs.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// Smallest edit distance between `needle` and any contiguous substring of
// `haystack` (the empty substring included).
std::size_t substring_distance(std::u32string_view needle, std::u32string_view haystack);

// 1 - lev / max(|a|, |b|) on normalized inputs; 1 when both are empty.
double anls_similarity(std::string_view a, std::string_view b);

inline constexpr double kAnlsThreshold = 0.5;

// Best thresholded similarity against any truth. Throws EmptyTruths.
double anls_score(std::string_view response, std::span<const std::string> truths);

// ChartQA convention: numbers within 5% of the target, exact (normalized) match otherwise.
int relaxed_accuracy(std::string_view response, std::string_view truth);

// Parses "37,133", "32.4%", " -1.5 " and the like. Empty optional if not a number.
std::optional<double> parse_relaxed_number(std::string_view s);

using Field = std::pair<std::string, std::string>;

// Micro F1; a hit is an equal key with a normalize-equal value. Keys must be
// unique per side (std::invalid_argument otherwise). Both sides empty gives 1.
double field_f1(std::span<const Field> predictions, std::span<const Field> truths);

struct ResponsePair {
  std::string pair_id;
  std::string cognitive_response;   // y_C
  std::string perceptual_response;  // y_P

  bool operator==(const ResponsePair&) const = default;
};

// 1 iff normalize(y_C) is a contiguous substring of normalize(y_P).
// An empty normalized y_C is never contained.
int delta_containment(std::string_view cognitive, std::string_view perceptual);

// Mean of delta_containment. Throws EmptyInput.
double cp_consistency(std::span<const ResponsePair> pairs);

struct GroundedPair {
  ResponsePair responses;
  std::string ground_truth;
};

struct IdealizedConsistency {
  std::optional<double> value;  // empty when no pair survives the filter
  std::size_t kept = 0;
  std::size_t total = 0;
};

// Consistency over pairs where both raw similarities to GT reach 0.5.
IdealizedConsistency idealized_cp_consistency(std::span<const GroundedPair> pairs);

enum class ConflictPattern {
  consistent,
  p1_char_error,
  p2_cognitive_bias,
  p3_limited_cognition,
  other,
};

std::string_view to_string(ConflictPattern p);
std::optional<ConflictPattern> conflict_pattern_from_string(std::string_view s);

struct PatternThresholds {
  // P1 allows up to max(1, ceil(char_budget_ratio * |y_C|)) edits.
  double char_budget_ratio = 0.2;
  double similarity = kAnlsThreshold;
  // A P1-sized edit that swaps in one of these words reads as a plausible
  // word choice rather than a misread glyph, and is labelled P2.
  std::vector<std::string> common_words = default_common_words();

  static std::vector<std::string> default_common_words();
};

ConflictPattern classify_pattern(const ResponsePair& pair, std::string_view ground_truth,
                                 const PatternThresholds& thresholds = {});

// Unweighted mean. Throws EmptyInput.
double macro_average(std::span<const double> values);

}  // namespace cpc::metrics
