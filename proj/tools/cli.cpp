#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include "cpc/corpus.hpp"
#include "cpc/endpoint.hpp"
#include "cpc/error.hpp"
#include "cpc/ftgen.hpp"
#include "cpc/harness.hpp"
#include "cpc/pairgen.hpp"
#include "cpc/report.hpp"

namespace cpc::cli {
namespace {

namespace fs = std::filesystem;

struct EndpointFlags {
  std::string url;
  std::string model;
  int max_parallel = 4;
  int timeout = 120;
  std::string key_env = kDefaultApiKeyEnv;
};

void add_endpoint_flags(CLI::App* sub, EndpointFlags& f, bool required) {
  auto* url = sub->add_option("--endpoint", f.url, "Chat-completions base URL, e.g. http://127.0.0.1:8000/v1");
  auto* model = sub->add_option("--model", f.model, "Model name sent with every request");
  if (required) {
    url->required();
    model->required();
  } else {
    model->needs(url);
  }
  sub->add_option("--max-parallel", f.max_parallel, "Pairs in flight at once")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--timeout", f.timeout, "Per-request timeout in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--api-key-env", f.key_env, "Environment variable holding the API key")->capture_default_str();
}

EndpointConfig endpoint_config(const EndpointFlags& f) {
  EndpointConfig c;
  c.base_url = f.url;
  c.model_name = f.model;
  c.max_parallel = f.max_parallel;
  c.timeout = std::chrono::seconds{f.timeout};
  if (const char* key = std::getenv(f.key_env.c_str())) c.api_key = key;
  if (c.api_key.empty()) spdlog::debug("{} is unset; sending requests without a key", f.key_env);
  c.validate();
  return c;
}

// Owns an optional HTTP endpoint plus its retry decorator.
struct OptionalEndpoint {
  std::unique_ptr<HttpChatEndpoint> http;
  std::unique_ptr<RetryingEndpoint> retrying;

  explicit OptionalEndpoint(const EndpointFlags& f) {
    if (f.url.empty()) return;
    http = std::make_unique<HttpChatEndpoint>(endpoint_config(f));
    retrying = std::make_unique<RetryingEndpoint>(*http, RetryPolicy{});
  }
  ChatEndpoint* get() { return retrying.get(); }
};

fs::path parent_or_dot(const fs::path& p) { return p.has_parent_path() ? p.parent_path() : fs::path("."); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoFailure("cannot write " + path.string());
}

corpus::Split parse_split(const std::string& s) { return *corpus::split_from_string(s); }

struct IngestArgs {
  std::string adapter;
  fs::path source;
  std::string split = "test";
  fs::path out;
  EndpointFlags endpoint;
};

int cmd_ingest(IngestArgs& a) {
  OptionalEndpoint endpoint(a.endpoint);
  auto result = corpus::adapt_dataset({a.adapter, a.source, parse_split(a.split)}, endpoint.get());
  corpus::rebase_image_paths(result.records, a.source, parent_or_dot(a.out));
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  corpus::emit_canonical(result.records, a.out);
  std::size_t qa = 0;
  for (const auto& r : result.records) qa += r.qa.size();
  std::cout << result.records.size() << " records, " << qa << " QA (dropped QA: " << result.dropped_qa
            << ", dropped tokens: " << result.dropped_tokens << ")\n";
  return 0;
}

struct BuildArgs {
  fs::path canonical;
  fs::path out;
  bool allow_fuzzy = false;
  EndpointFlags endpoint;
};

int cmd_build_pairs(BuildArgs& a) {
  OptionalEndpoint endpoint(a.endpoint);
  const auto records = corpus::parse_canonical(a.canonical);
  pairgen::BuildOptions opts;
  opts.image_root = parent_or_dot(a.canonical);
  opts.allow_fuzzy = a.allow_fuzzy;
  const auto result = pairgen::build_eval_pairs(records, endpoint.get(), a.out, opts);

  std::map<corpus::Dataset, std::pair<std::size_t, std::set<std::string>>> counts;
  for (const auto& p : result.pairs) {
    auto& c = counts[p.dataset];
    ++c.first;
    c.second.insert(p.record_id);
  }
  std::cout << "| Dataset | Pairs | Images |\n|---|---|---|\n";
  std::size_t total_images = 0;
  for (const auto& [d, c] : counts) {
    std::cout << "| " << corpus::to_string(d) << " | " << c.first << " | " << c.second.size() << " |\n";
    total_images += c.second.size();
  }
  std::cout << "| total | " << result.pairs.size() << " | " << total_images << " |\n";
  spdlog::info("kept {} QA; dropped {} non-extractive, {} unlocated; {} failures", result.kept_qa,
               result.dropped_non_extractive, result.dropped_unlocated, result.failures.size());
  for (const auto& f : result.failures) spdlog::warn("{}: {}", f.record_id, f.reason);
  if (result.pairs.empty() && !result.failures.empty()) {
    spdlog::error("every record failed");
    return 1;
  }
  return 0;
}

struct EvaluateArgs {
  fs::path manifest;
  fs::path cache;
  fs::path out;
  fs::path report;
  fs::path extract_rules;
  std::string format = "markdown";
  std::string profile = "closed";
  std::string label;
  EndpointFlags endpoint;
};

int write_report(const report::MetricReport& rep, const std::string& format, const fs::path& out) {
  const std::string text = report::render_report(rep, *report::format_from_string(format));
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  return 0;
}

int cmd_evaluate(EvaluateArgs& a) {
  const auto config = endpoint_config(a.endpoint);
  const auto pairs = pairgen::read_manifest(a.manifest);
  if (pairs.empty()) {
    spdlog::error("{} holds no pairs", a.manifest.string());
    return 1;
  }
  HttpChatEndpoint endpoint(config);
  std::unique_ptr<harness::ResponseCache> cache =
      a.cache.empty() ? std::make_unique<harness::ResponseCache>() : std::make_unique<harness::ResponseCache>(a.cache);
  harness::AnswerExtractor extractor;
  if (!a.extract_rules.empty()) extractor = harness::AnswerExtractor::from_json_file(a.extract_rules);

  harness::RunOptions opts;
  opts.model_name = config.model_name;
  opts.max_parallel = config.max_parallel;
  opts.profile = *harness::profile_from_string(a.profile);
  opts.image_root = parent_or_dot(a.manifest);
  opts.extractor = extractor.empty() ? nullptr : &extractor;
  const auto run = harness::run_pairs(endpoint, pairs, *cache, opts);
  harness::write_responses(run.responses, a.out);
  spdlog::info("{} pairs, {} failed, {} endpoint calls, {} cache hits", pairs.size(), run.n_failed,
               run.endpoint_calls, run.cache_hits);
  if (run.n_failed == pairs.size()) {
    spdlog::error("no pair succeeded");
    return 2;
  }
  const auto rep = report::build_report(run.responses, pairs, a.label.empty() ? config.model_name : a.label);
  return write_report(rep, a.format, a.report);
}

struct FtgenArgs {
  fs::path manifest;
  fs::path out;
  bool allow_test_split = false;
  EndpointFlags endpoint;
};

int cmd_ftgen(FtgenArgs& a, std::uint64_t seed) {
  OptionalEndpoint endpoint(a.endpoint);
  const auto pairs = pairgen::read_manifest(a.manifest);
  ftgen::TrainingOptions opts;
  opts.manifest_dir = parent_or_dot(a.manifest);
  opts.allow_test_split = a.allow_test_split;
  const auto set = ftgen::emit_training_set(pairs, seed, endpoint.get(), a.out, opts);
  std::map<ftgen::RecordKind, std::size_t> kinds;
  for (auto k : {ftgen::RecordKind::cognitive, ftgen::RecordKind::perceptual, ftgen::RecordKind::connector_pos,
                 ftgen::RecordKind::connector_neg}) {
    kinds[k] = 0;
  }
  for (const auto& r : set.records) ++kinds[r.record_kind];
  std::cout << set.records.size() << " records\n";
  for (const auto& [k, n] : kinds) std::cout << ftgen::to_string(k) << ": " << n << "\n";
  for (const auto& f : set.failures) spdlog::warn("{}: {}", f.pair_id, f.reason);
  if (!set.failures.empty()) spdlog::warn("{} pairs skipped", set.failures.size());
  return 0;
}

struct ReportArgs {
  fs::path responses;
  fs::path manifest;
  fs::path out;
  std::string format = "markdown";
  std::string label;
};

int cmd_report(ReportArgs& a) {
  const auto pairs = pairgen::read_manifest(a.manifest);
  const auto responses = harness::read_responses(a.responses);
  return write_report(report::build_report(responses, pairs, a.label), a.format, a.out);
}

std::shared_ptr<spdlog::logger> stderr_logger() {
  static const auto logger = [] {
    auto l = spdlog::stderr_color_mt("cpc");
    l->set_pattern("[%l] %v");
    return l;
  }();
  return logger;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  spdlog::set_default_logger(stderr_logger());

  CLI::App app{"Cognition/perception consistency toolkit"};
  app.name("cpc");
  app.set_config("--config", "", "TOML or INI file with option defaults; flags take precedence");
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::string log_level = "info";
  app.add_option("--seed", seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  const std::vector<std::string> splits = {"train", "test"};
  const std::vector<std::string> formats = {"json", "csv", "markdown"};

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Convert a dataset source tree into canonical records");
  s_ingest->add_option("--adapter", ingest.adapter, "Source layout")
      ->required()
      ->check(CLI::IsMember(corpus::adapter_names()));
  s_ingest->add_option("--source", ingest.source, "Dataset root directory")->required()->check(CLI::ExistingDirectory);
  s_ingest->add_option("--split", ingest.split, "train or test")->capture_default_str()->check(CLI::IsMember(splits));
  s_ingest->add_option("--out", ingest.out, "Canonical JSONL output")->required();
  add_endpoint_flags(s_ingest, ingest.endpoint, false);

  BuildArgs build;
  auto* s_build = app.add_subcommand("build-pairs", "Filter QA, locate boxes and render evaluation pairs");
  s_build->add_option("--canonical", build.canonical, "Canonical JSONL input")->required()->check(CLI::ExistingFile);
  s_build->add_option("--out", build.out, "Output directory for pairs.jsonl and images/")->required();
  s_build->add_flag("--allow-fuzzy", build.allow_fuzzy, "Keep boxes found by one-edit token matching");
  add_endpoint_flags(s_build, build.endpoint, false);

  EvaluateArgs eval;
  auto* s_eval = app.add_subcommand("evaluate", "Query an endpoint with every pair and report consistency");
  s_eval->add_option("--manifest", eval.manifest, "Pair manifest (pairs.jsonl)")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--out", eval.out, "Response manifest output")->required();
  s_eval->add_option("--cache", eval.cache, "Append-only response cache file");
  s_eval->add_option("--report", eval.report, "Report output (stdout when omitted)");
  s_eval->add_option("--format", eval.format, "Report format")->capture_default_str()->check(CLI::IsMember(formats));
  s_eval->add_option("--profile", eval.profile, "Prompt profile: closed or sft")
      ->capture_default_str()
      ->check(CLI::IsMember({"closed", "sft"}));
  s_eval->add_option("--label", eval.label, "Row label in the report (defaults to the model name)");
  s_eval->add_option("--extract-rules", eval.extract_rules, "JSON map of dataset -> answer regex")
      ->check(CLI::ExistingFile);
  add_endpoint_flags(s_eval, eval.endpoint, true);

  FtgenArgs ft;
  auto* s_ft = app.add_subcommand("ftgen", "Emit consistency fine-tuning records");
  s_ft->add_option("--manifest", ft.manifest, "Pair manifest (pairs.jsonl)")->required()->check(CLI::ExistingFile);
  s_ft->add_option("--out", ft.out, "Training JSONL output")->required();
  s_ft->add_flag("--allow-test-split", ft.allow_test_split, "Also use pairs from the test split");
  add_endpoint_flags(s_ft, ft.endpoint, false);

  ReportArgs rep;
  auto* s_rep = app.add_subcommand("report", "Recompute a report from saved responses");
  s_rep->add_option("--responses", rep.responses, "Response manifest")->required()->check(CLI::ExistingFile);
  s_rep->add_option("--manifest", rep.manifest, "Pair manifest")->required()->check(CLI::ExistingFile);
  s_rep->add_option("--out", rep.out, "Report output (stdout when omitted)");
  s_rep->add_option("--format", rep.format, "Report format")->capture_default_str()->check(CLI::IsMember(formats));
  s_rep->add_option("--label", rep.label, "Row label in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::info("resolved configuration:\n{}", app.config_to_str(true, false));

  try {
    if (s_ingest->parsed()) return cmd_ingest(ingest);
    if (s_build->parsed()) return cmd_build_pairs(build);
    if (s_eval->parsed()) return cmd_evaluate(eval);
    if (s_ft->parsed()) return cmd_ftgen(ft, seed);
    if (s_rep->parsed()) return cmd_report(rep);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace cpc::cli
