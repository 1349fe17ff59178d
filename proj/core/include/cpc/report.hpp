#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpc/corpus.hpp"
#include "cpc/harness.hpp"
#include "cpc/metrics.hpp"
#include "cpc/pairgen.hpp"

namespace cpc::report {

// Fractions in [0, 1]; empty optionals are undefined (no data).
struct DatasetMetrics {
  std::optional<double> cp_consistency;
  std::optional<double> idealized_cp_consistency;
  std::optional<double> cognitive_score;
  std::optional<double> perceptual_score;
  std::size_t n_pairs = 0;   // successful pairs
  std::size_t n_failed = 0;
  std::size_t n_idealized = 0;  // pairs surviving the ANLS filter

  bool operator==(const DatasetMetrics&) const = default;
};

struct MacroMetrics {
  std::optional<double> cp_consistency;
  std::optional<double> idealized;

  bool operator==(const MacroMetrics&) const = default;
};

struct MetricReport {
  std::string label;  // model or run name for table rows
  std::map<corpus::Dataset, DatasetMetrics> per_dataset;
  MacroMetrics macro;
  // Over inconsistent pairs only; sums to 1 when any exist.
  std::map<metrics::ConflictPattern, double> pattern_distribution;
  std::map<metrics::ConflictPattern, std::size_t> pattern_counts;

  bool operator==(const MetricReport&) const = default;
};

// Cognitive metric by dataset.
enum class CognitiveMetric { anls, field_f1, relaxed_accuracy };
CognitiveMetric cognitive_metric_for(corpus::Dataset d);

// Throws EmptyInput, UnknownPairReference.
MetricReport build_report(const std::vector<harness::PairResponse>& responses,
                          const std::vector<pairgen::EvalPair>& pairs, std::string label = {},
                          const metrics::PatternThresholds& thresholds = {});

enum class Format { json, csv, markdown };
std::optional<Format> format_from_string(std::string_view s);

std::string render_report(const MetricReport& report, Format format);

// Inverse of the JSON rendering.
MetricReport parse_report_json(std::string_view text);

}  // namespace cpc::report
