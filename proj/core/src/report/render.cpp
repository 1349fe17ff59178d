#include <nlohmann/json.hpp>

#include <cstdio>

#include "cpc/error.hpp"
#include "cpc/report.hpp"

namespace cpc::report {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kUndefined = "—";

std::string_view display_name(corpus::Dataset d) {
  switch (d) {
    case corpus::Dataset::docvqa: return "DocVQA";
    case corpus::Dataset::dude: return "DUDE";
    case corpus::Dataset::deepform: return "DeepForm";
    case corpus::Dataset::funsd: return "FUNSD";
    case corpus::Dataset::chartqa: return "ChartQA";
    case corpus::Dataset::custom: return "Custom";
  }
  return "";
}

std::string percent(const std::optional<double>& v) {
  if (!v) return std::string(kUndefined);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
  return buf;
}

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<double> get_opt(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

std::string raw(const std::optional<double>& v) { return v ? json(*v).dump() : std::string(); }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string render_json(const MetricReport& r) {
  ordered_json j;
  j["label"] = r.label;
  ordered_json per = ordered_json::object();
  for (const auto& [d, m] : r.per_dataset) {
    per[std::string(corpus::to_string(d))] = {
        {"cp_consistency", opt(m.cp_consistency)},
        {"idealized_cp_consistency", opt(m.idealized_cp_consistency)},
        {"cognitive_score", opt(m.cognitive_score)},
        {"perceptual_score", opt(m.perceptual_score)},
        {"n_pairs", m.n_pairs},
        {"n_failed", m.n_failed},
        {"n_idealized", m.n_idealized},
    };
  }
  j["per_dataset"] = per;
  j["macro"] = {{"cp_consistency", opt(r.macro.cp_consistency)}, {"idealized", opt(r.macro.idealized)}};
  ordered_json dist = ordered_json::object();
  for (const auto& [p, f] : r.pattern_distribution) dist[std::string(metrics::to_string(p))] = f;
  j["pattern_distribution"] = dist;
  ordered_json counts = ordered_json::object();
  for (const auto& [p, n] : r.pattern_counts) counts[std::string(metrics::to_string(p))] = n;
  j["pattern_counts"] = counts;
  return j.dump(2, ' ', false, ordered_json::error_handler_t::replace) + "\n";
}

std::string render_csv(const MetricReport& r) {
  std::string out = "dataset,metric,value\n";
  auto row = [&](std::string_view a, std::string_view b, const std::string& v) {
    out += csv_field(a) + "," + csv_field(b) + "," + v + "\n";
  };
  for (const auto& [d, m] : r.per_dataset) {
    const auto name = corpus::to_string(d);
    row(name, "cp_consistency", raw(m.cp_consistency));
    row(name, "idealized_cp_consistency", raw(m.idealized_cp_consistency));
    row(name, "cognitive_score", raw(m.cognitive_score));
    row(name, "perceptual_score", raw(m.perceptual_score));
    row(name, "n_pairs", std::to_string(m.n_pairs));
    row(name, "n_failed", std::to_string(m.n_failed));
    row(name, "n_idealized", std::to_string(m.n_idealized));
  }
  row("macro", "cp_consistency", raw(r.macro.cp_consistency));
  row("macro", "idealized", raw(r.macro.idealized));
  for (const auto& [p, n] : r.pattern_counts) {
    const auto it = r.pattern_distribution.find(p);
    row("patterns", std::string(metrics::to_string(p)) + "_count", std::to_string(n));
    row("patterns", std::string(metrics::to_string(p)) + "_fraction",
        raw(it == r.pattern_distribution.end() ? std::nullopt : std::optional(it->second)));
  }
  return out;
}

std::string render_markdown(const MetricReport& r) {
  const std::string label = r.label.empty() ? "model" : r.label;
  std::string out = "### C&P consistency (%), idealized in subscript\n\n| Model |";
  std::string rule = "|---|";
  for (const auto& [d, m] : r.per_dataset) {
    out += " " + std::string(display_name(d)) + " |";
    rule += "---|";
  }
  out += " Average |\n" + rule + "---|\n| " + label + " |";
  for (const auto& [d, m] : r.per_dataset) {
    out += " " + percent(m.cp_consistency) + "<sub>" + percent(m.idealized_cp_consistency) + "</sub> |";
  }
  out += " " + percent(r.macro.cp_consistency) + "<sub>" + percent(r.macro.idealized) + "</sub> |\n\n";

  out += "### Per dataset\n\n"
         "| Dataset | C&P consistency | Idealized | Cognitive | Perceptual | Pairs | Failed | Idealized pairs |\n"
         "|---|---|---|---|---|---|---|---|\n";
  for (const auto& [d, m] : r.per_dataset) {
    out += "| " + std::string(display_name(d)) + " | " + percent(m.cp_consistency) + " | " +
           percent(m.idealized_cp_consistency) + " | " + percent(m.cognitive_score) + " | " +
           percent(m.perceptual_score) + " | " + std::to_string(m.n_pairs) + " | " + std::to_string(m.n_failed) +
           " | " + std::to_string(m.n_idealized) + " |\n";
  }

  out += "\n### Conflict patterns (share of inconsistent pairs)\n\n| Pattern | Count | Share (%) |\n|---|---|---|\n";
  for (const auto& [p, n] : r.pattern_counts) {
    const auto it = r.pattern_distribution.find(p);
    out += "| " + std::string(metrics::to_string(p)) + " | " + std::to_string(n) + " | " +
           percent(it == r.pattern_distribution.end() ? std::nullopt : std::optional(it->second)) + " |\n";
  }
  return out;
}

}  // namespace

std::optional<Format> format_from_string(std::string_view s) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  if (s == "markdown" || s == "md") return Format::markdown;
  return std::nullopt;
}

std::string render_report(const MetricReport& report, Format format) {
  switch (format) {
    case Format::json: return render_json(report);
    case Format::csv: return render_csv(report);
    case Format::markdown: return render_markdown(report);
  }
  return {};
}

MetricReport parse_report_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    MetricReport r;
    r.label = j.at("label").get<std::string>();
    for (const auto& [name, m] : j.at("per_dataset").items()) {
      const auto d = corpus::dataset_from_string(name);
      if (!d) throw std::invalid_argument("unknown dataset '" + name + "'");
      DatasetMetrics dm;
      dm.cp_consistency = get_opt(m, "cp_consistency");
      dm.idealized_cp_consistency = get_opt(m, "idealized_cp_consistency");
      dm.cognitive_score = get_opt(m, "cognitive_score");
      dm.perceptual_score = get_opt(m, "perceptual_score");
      dm.n_pairs = m.at("n_pairs").get<std::size_t>();
      dm.n_failed = m.at("n_failed").get<std::size_t>();
      dm.n_idealized = m.at("n_idealized").get<std::size_t>();
      r.per_dataset[*d] = dm;
    }
    r.macro.cp_consistency = get_opt(j.at("macro"), "cp_consistency");
    r.macro.idealized = get_opt(j.at("macro"), "idealized");
    auto pattern = [](const std::string& name) {
      const auto p = metrics::conflict_pattern_from_string(name);
      if (!p) throw std::invalid_argument("unknown pattern '" + name + "'");
      return *p;
    };
    for (const auto& [name, f] : j.at("pattern_distribution").items()) r.pattern_distribution[pattern(name)] = f.get<double>();
    for (const auto& [name, n] : j.at("pattern_counts").items()) r.pattern_counts[pattern(name)] = n.get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

}  // namespace cpc::report
