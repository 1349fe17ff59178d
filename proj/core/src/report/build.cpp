#include <unordered_map>

#include "cpc/error.hpp"
#include "cpc/report.hpp"

namespace cpc::report {
namespace {

std::optional<double> mean(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double sum = 0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::optional<double> macro_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return metrics::macro_average(v);
}

}  // namespace

CognitiveMetric cognitive_metric_for(corpus::Dataset d) {
  switch (d) {
    case corpus::Dataset::deepform: return CognitiveMetric::field_f1;
    case corpus::Dataset::chartqa: return CognitiveMetric::relaxed_accuracy;
    default: return CognitiveMetric::anls;
  }
}

MetricReport build_report(const std::vector<harness::PairResponse>& responses,
                          const std::vector<pairgen::EvalPair>& pairs, std::string label,
                          const metrics::PatternThresholds& thresholds) {
  if (responses.empty()) throw EmptyInput("no responses to report on");
  std::unordered_map<std::string, const pairgen::EvalPair*> by_id;
  for (const auto& p : pairs) by_id.emplace(p.pair_id, &p);

  struct Bucket {
    std::vector<metrics::GroundedPair> ok;
    std::vector<const pairgen::EvalPair*> ok_pairs;
    std::size_t failed = 0;
  };
  std::map<corpus::Dataset, Bucket> buckets;
  for (const auto& r : responses) {
    const auto it = by_id.find(r.responses.pair_id);
    if (it == by_id.end()) throw UnknownPairReference(r.responses.pair_id);
    auto& b = buckets[it->second->dataset];
    if (r.status == harness::PairStatus::failed) {
      ++b.failed;
      continue;
    }
    b.ok.push_back({r.responses, it->second->ground_truth});
    b.ok_pairs.push_back(it->second);
  }

  MetricReport report;
  report.label = std::move(label);
  for (auto p : {metrics::ConflictPattern::p1_char_error, metrics::ConflictPattern::p2_cognitive_bias,
                 metrics::ConflictPattern::p3_limited_cognition, metrics::ConflictPattern::other}) {
    report.pattern_counts[p] = 0;
  }
  std::size_t inconsistent = 0;
  std::vector<double> macro_raw, macro_ideal;

  for (const auto& [dataset, b] : buckets) {
    DatasetMetrics m;
    m.n_pairs = b.ok.size();
    m.n_failed = b.failed;
    if (!b.ok.empty()) {
      std::vector<metrics::ResponsePair> rp;
      std::vector<double> cognitive, perceptual;
      std::vector<metrics::Field> predictions, truths;
      const auto metric = cognitive_metric_for(dataset);
      for (std::size_t i = 0; i < b.ok.size(); ++i) {
        const auto& g = b.ok[i];
        const auto& pair = *b.ok_pairs[i];
        rp.push_back(g.responses);
        const std::string& y_c = g.responses.cognitive_response;
        switch (metric) {
          case CognitiveMetric::anls:
            cognitive.push_back(metrics::anls_score(y_c, std::vector<std::string>{g.ground_truth}));
            break;
          case CognitiveMetric::relaxed_accuracy:
            cognitive.push_back(metrics::relaxed_accuracy(y_c, g.ground_truth));
            break;
          case CognitiveMetric::field_f1:
            if (!metrics::normalize(y_c).empty()) predictions.emplace_back(pair.pair_id, y_c);
            truths.emplace_back(pair.pair_id, g.ground_truth);
            break;
        }
        perceptual.push_back(metrics::anls_score(g.responses.perceptual_response,
                                                 std::vector<std::string>{g.ground_truth, pair.box_text}));
        const auto pattern = metrics::classify_pattern(g.responses, g.ground_truth, thresholds);
        if (pattern != metrics::ConflictPattern::consistent) {
          ++report.pattern_counts[pattern];
          ++inconsistent;
        }
      }
      m.cp_consistency = metrics::cp_consistency(rp);
      const auto ideal = metrics::idealized_cp_consistency(b.ok);
      m.idealized_cp_consistency = ideal.value;
      m.n_idealized = ideal.kept;
      m.cognitive_score = metric == CognitiveMetric::field_f1 ? std::optional(metrics::field_f1(predictions, truths))
                                                              : mean(cognitive);
      m.perceptual_score = mean(perceptual);
      macro_raw.push_back(*m.cp_consistency);
      if (m.idealized_cp_consistency) macro_ideal.push_back(*m.idealized_cp_consistency);
    }
    report.per_dataset[dataset] = m;
  }

  report.macro.cp_consistency = macro_of(macro_raw);
  report.macro.idealized = macro_of(macro_ideal);
  if (inconsistent > 0) {
    for (const auto& [p, n] : report.pattern_counts) {
      report.pattern_distribution[p] = static_cast<double>(n) / static_cast<double>(inconsistent);
    }
  }
  return report;
}

}  // namespace cpc::report
