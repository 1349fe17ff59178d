// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "cpc/error.hpp"
#include "cpc/ftgen.hpp"
#include "cpc/harness.hpp"
#include "cpc/hash.hpp"
#include "cpc/metrics.hpp"
#include "cpc/pairgen.hpp"
#include "cpc/report.hpp"
#include "fixtures.hpp"
#include "scripted_endpoint.hpp"

namespace fs = std::filesystem;
namespace m = cpc::metrics;
using cpc::testing::ScriptedEndpoint;
using cpc::testing::TempDir;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and limits, fixed here rather than in the checks.
constexpr double kRecountTolerance = 1e-12;
constexpr double kMacroTarget = 75.26;
constexpr double kMacroTolerance = 0.005;
constexpr double kDistributionTolerance = 1e-9;
constexpr double kAnlsOracleSeconds = 10.0;
constexpr double kRecountSeconds = 1.0;
constexpr double kEndToEndSeconds = 5.0;
constexpr double kFtgenSeconds = 2.0;

// Frozen outputs of the renderer on the fixture below.
constexpr const char* kGoldenPngSha256 = "b16e344a1171716b2831151eb05b6f4c58de0a658514829d5ddae3b6b869d59e";
constexpr const char* kGoldenPixelSha256 = "5db99736599c3ec1a292739c2af4f33b8d2aa1bd4939ee6b42b6c8983d982b9e";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- oracles -------------------------------------------------------------

std::size_t oracle_lev(const std::string& a, const std::string& b) {
  std::size_t d[8][8];
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1] ? 1u : 0u)});
    }
  }
  return d[a.size()][b.size()];
}

// Lowercase, collapse whitespace, trim; enough for ASCII inputs.
std::string oracle_normalize(const std::string& s) {
  std::string out;
  bool gap = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n') {
      gap = !out.empty();
      continue;
    }
    if (gap) out += ' ';
    gap = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

int oracle_delta(const std::string& c, const std::string& p) {
  const auto nc = oracle_normalize(c);
  const auto np = oracle_normalize(p);
  if (nc.empty()) return 0;
  for (std::size_t i = 0; i + nc.size() <= np.size(); ++i) {
    if (np.compare(i, nc.size(), nc) == 0) return 1;
  }
  return 0;
}

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::string alphabet = "abAB Cc1";
  std::string s(rng() % (max_len + 1), ' ');
  for (auto& c : s) c = alphabet[rng() % alphabet.size()];
  return s;
}

// ---- criteria ------------------------------------------------------------

Outcome anls_oracle_equivalence() {
  std::vector<std::string> all = {""};
  for (std::size_t start = 0; all.back().size() < 6;) {
    const std::size_t end = all.size();
    for (std::size_t i = start; i < end; ++i) {
      for (char c : {'a', 'b', 'c'}) all.push_back(all[i] + c);
    }
    start = end;
  }
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (const auto& a : all) {
    for (const auto& b : all) {
      const std::size_t longest = std::max(a.size(), b.size());
      const double expected = longest == 0 ? 1.0 : 1.0 - static_cast<double>(oracle_lev(a, b)) / longest;
      mismatches += m::anls_similarity(a, b) != expected;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < kAnlsOracleSeconds,
          fmt("%zu strings, %zu pairs, %zu mismatches, %.2fs", all.size(), all.size() * all.size(), mismatches, secs)};
}

Outcome consistency_recount() {
  std::mt19937_64 rng(20240601);
  std::vector<m::ResponsePair> pairs;
  for (int i = 0; i < 10000; ++i) {
    std::string c = random_text(rng, 3);
    std::string p = random_text(rng, 8);
    if (rng() % 3 == 0) p = random_text(rng, 2) + c + random_text(rng, 2);
    pairs.push_back({std::to_string(i), c, p});
  }
  const auto t0 = Clock::now();
  const double value = m::cp_consistency(pairs);
  const double secs = seconds_since(t0);
  std::size_t hits = 0;
  for (const auto& p : pairs) hits += oracle_delta(p.cognitive_response, p.perceptual_response);
  const double expected = static_cast<double>(hits) / pairs.size();
  return {std::abs(value - expected) <= kRecountTolerance && secs < kRecountSeconds,
          fmt("cp_consistency %.15f vs recount %zu/10000, %.3fs", value, hits, secs)};
}

Outcome macro_average_row() {
  const std::vector<double> row = {85.58, 67.84, 62.70, 78.76, 81.41};
  const double v = m::macro_average(row);
  return {std::abs(v - kMacroTarget) <= kMacroTolerance, fmt("macro_average = %.4f", v)};
}

// 20 docvqa pairs: 0..14 consistent, 15..17 one substituted character in
// y_C (close to GT, inconsistent), 18..19 unrelated y_C (filtered out).
constexpr int kE2ePairs = 20;
constexpr double kDesignedRaw = 15.0 / 20.0;
constexpr double kDesignedIdealized = 15.0 / 18.0;

std::string designed_cognitive(int i, const std::string& gt) {
  if (i < 15) return gt;
  if (i < 18) {
    std::string s = gt;
    s[1] = 'X';
    return s;
  }
  return "unrelated words";
}

Outcome end_to_end_mock() {
  TempDir dir;
  const auto docvqa = cpc::corpus::Dataset::docvqa;
  const auto fx = cpc::testing::make_eval_fixture(dir.path(), kE2ePairs, cpc::corpus::Split::test, &docvqa);
  if (fx.pairs.size() != kE2ePairs) return {false, fmt("fixture built %zu pairs", fx.pairs.size())};

  std::map<fs::path, std::string> replies;
  for (int i = 0; i < kE2ePairs; ++i) {
    const auto& p = fx.pairs[static_cast<std::size_t>(i)];
    replies[fx.pair_dir / p.plain_image] = designed_cognitive(i, p.ground_truth);
    replies[fx.pair_dir / p.boxed_image] = p.box_text;
  }
  std::array<std::string, 2> json_reports, response_files;
  double raw = -1, idealized = -1;
  const auto t0 = Clock::now();
  for (int run = 0; run < 2; ++run) {
    ScriptedEndpoint endpoint(
        [&](std::string_view, std::span<const fs::path> images, int) { return replies.at(images[0]); });
    cpc::harness::ResponseCache cache;
    cpc::harness::RunOptions opts;
    opts.model_name = "scripted";
    opts.image_root = fx.pair_dir;
    const auto res = cpc::harness::run_pairs(endpoint, fx.pairs, cache, opts);
    const auto rep = cpc::report::build_report(res.responses, fx.pairs, "scripted");
    json_reports[static_cast<std::size_t>(run)] = cpc::report::render_report(rep, cpc::report::Format::json);
    const auto out = dir / ("responses" + std::to_string(run) + ".jsonl");
    cpc::harness::write_responses(res.responses, out);
    response_files[static_cast<std::size_t>(run)] = cpc::testing::read_text_file(out);
    raw = rep.macro.cp_consistency.value_or(-1);
    idealized = rep.macro.idealized.value_or(-1);
  }
  const double secs = seconds_since(t0);
  const bool identical = json_reports[0] == json_reports[1] && response_files[0] == response_files[1];
  return {raw == kDesignedRaw && idealized == kDesignedIdealized && identical && secs < kEndToEndSeconds,
          fmt("raw %.4f (designed %.4f), idealized %.4f (designed %.4f), runs identical: %s, %.2fs", raw,
              kDesignedRaw, idealized, kDesignedIdealized, identical ? "yes" : "no", secs)};
}

Outcome training_cardinality() {
  TempDir dir;
  constexpr std::size_t n = 200;
  const auto fx = cpc::testing::make_eval_fixture(dir.path(), static_cast<int>(n), cpc::corpus::Split::train);
  if (fx.pairs.size() != n) return {false, fmt("fixture built %zu pairs", fx.pairs.size())};
  cpc::ftgen::TrainingOptions opts;
  opts.manifest_dir = fx.pair_dir;
  const auto t0 = Clock::now();
  const auto set = cpc::ftgen::emit_training_set(fx.pairs, 0, nullptr, dir / "train.jsonl", opts);
  const double secs = seconds_since(t0);

  std::map<cpc::ftgen::RecordKind, std::size_t> kinds;
  std::size_t bad_spans = 0, bad_order = 0, connectors = 0;
  std::map<std::string, const cpc::pairgen::EvalPair*> by_id;
  for (const auto& p : fx.pairs) by_id[p.pair_id] = &p;
  for (const auto& r : set.records) {
    ++kinds[r.record_kind];
    std::vector<cpc::ftgen::LinkSpan> spans;
    try {
      spans = cpc::ftgen::parse_link_spans(r.response);
    } catch (const cpc::MalformedLinks&) {
      ++bad_spans;
      continue;
    }
    if (spans.empty()) ++bad_spans;
    if (r.record_kind == cpc::ftgen::RecordKind::connector_pos ||
        r.record_kind == cpc::ftgen::RecordKind::connector_neg) {
      ++connectors;
      const auto* p = by_id.at(r.pair_id);
      if (spans.size() < 2 || m::normalize(spans.front().text) != m::normalize(p->box_text) ||
          m::normalize(spans.back().text) != m::normalize(p->ground_truth)) {
        ++bad_order;
      }
    }
  }
  bool counts_ok = set.records.size() == 4 * n && kinds.size() == 4;
  for (const auto& [k, c] : kinds) counts_ok = counts_ok && c == n;
  return {counts_ok && bad_spans == 0 && bad_order == 0 && secs < kFtgenSeconds,
          fmt("%zu records for %zu pairs, kinds {%zu,%zu,%zu,%zu}, span failures %zu, "
              "connector order violations %zu/%zu, %.2fs",
              set.records.size(), n, kinds[cpc::ftgen::RecordKind::cognitive],
              kinds[cpc::ftgen::RecordKind::perceptual], kinds[cpc::ftgen::RecordKind::connector_pos],
              kinds[cpc::ftgen::RecordKind::connector_neg], bad_spans, bad_order, connectors, secs)};
}

Outcome perturbation_constraints() {
  std::vector<std::string> answers = {"Doral", "a", "0", "yes", "No", "$1,250.00", "2020", "12/31/2019",
                                      "Acme PAC", "32.4", "l", "O", "rn", "I", "5", "mm", "Total Gross",
                                      "\xC3\x89" "cole", "\xE6\x9D\xB1\xE4\xBA\xAC", "x-ray", "N/A", "ID#5521",
                                      "George Washington", "WJLA-TV", "100%", "0.5", "Lorillard", "cc", "oo", "11"};
  std::mt19937_64 rng(50);
  const std::string alphabet = "aceloIO015Srnm ,.$";
  while (answers.size() < 50) {
    std::string s(1 + rng() % 8, 'a');
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
    if (!m::normalize(s).empty()) answers.push_back(s);
  }
  std::size_t violations = 0, triples = 0;
  for (const auto& a : answers) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto v = cpc::ftgen::perturb_answer(a, seed).variants;
      ++triples;
      const bool ok = v[0] != v[1] && v[1] != v[2] && v[0] != v[2] && v[0] != a && v[1] != a && v[2] != a;
      violations += !ok;
    }
  }
  return {violations == 0 && answers.size() == 50, fmt("%zu triples, %zu violations", triples, violations)};
}

Outcome renderer_golden() {
  TempDir dir;
  cpc::RgbImage plain(640, 480);
  for (int y = 0; y < plain.height; ++y) {
    for (int x = 0; x < plain.width; ++x) {
      auto* p = plain.at(x, y);
      p[0] = static_cast<std::uint8_t>((x * 7 + y) & 0xFF);
      p[1] = static_cast<std::uint8_t>((y * 3) & 0xFF);
      p[2] = static_cast<std::uint8_t>((x ^ y) & 0xFF);
    }
  }
  cpc::write_png(dir / "plain.png", plain);
  const cpc::corpus::BoundingBox box{120, 200, 330, 236};
  cpc::pairgen::render_visual_prompt(dir / "plain.png", box, dir / "boxed.png");
  cpc::pairgen::render_visual_prompt(dir / "plain.png", box, dir / "boxed2.png");

  const auto file_sha = cpc::sha256_hex(cpc::read_file_bytes(dir / "boxed.png"));
  const auto boxed = cpc::read_png(dir / "boxed.png");
  const auto pixel_sha = cpc::sha256_hex(
      std::string_view(reinterpret_cast<const char*>(boxed.pixels.data()), boxed.pixels.size()));
  const bool repeatable = cpc::read_file_bytes(dir / "boxed.png") == cpc::read_file_bytes(dir / "boxed2.png");

  // Band from the drawing rule: w pixels of padding, then w pixels of red.
  const int w = 2;  // max(2, round(0.003 * 640))
  auto in_band = [&](int x, int y) {
    const bool outer = x >= box.x_min - 2 * w && x < box.x_max + 2 * w && y >= box.y_min - 2 * w &&
                       y < box.y_max + 2 * w;
    const bool inner = x >= box.x_min - w && x < box.x_max + w && y >= box.y_min - w && y < box.y_max + w;
    return outer && !inner;
  };
  std::size_t outside_changed = 0, band_not_red = 0;
  for (int y = 0; y < plain.height; ++y) {
    for (int x = 0; x < plain.width; ++x) {
      const auto* a = plain.at(x, y);
      const auto* b = boxed.at(x, y);
      if (in_band(x, y)) {
        band_not_red += !(b[0] == 255 && b[1] == 0 && b[2] == 0);
      } else {
        outside_changed += a[0] != b[0] || a[1] != b[1] || a[2] != b[2];
      }
    }
  }
  const int mx = (box.x_min + box.x_max) / 2, my = (box.y_min + box.y_max) / 2;
  std::size_t midpoints_red = 0;
  for (auto [x, y] : {std::pair{mx, box.y_min - 2 * w}, std::pair{mx, box.y_max + 2 * w - 1},
                      std::pair{box.x_min - 2 * w, my}, std::pair{box.x_max + 2 * w - 1, my}}) {
    const auto* p = boxed.at(x, y);
    midpoints_red += p[0] == 255 && p[1] == 0 && p[2] == 0;
  }
  const bool golden = file_sha == kGoldenPngSha256 && pixel_sha == kGoldenPixelSha256;
  return {golden && repeatable && outside_changed == 0 && band_not_red == 0 && midpoints_red == 4,
          fmt("file sha256 %s, pixel sha256 %s, golden match: %s, repeatable: %s, midpoints red %zu/4, "
              "outside-band changes %zu, band pixels not red %zu",
              file_sha.c_str(), pixel_sha.c_str(), golden ? "yes" : "no", repeatable ? "yes" : "no", midpoints_red,
              outside_changed, band_not_red)};
}

Outcome idealized_filter() {
  auto make = [](const std::string& id, const std::string& gt) {
    cpc::pairgen::EvalPair p;
    p.pair_id = id;
    p.ground_truth = gt;
    p.box_text = gt;
    p.box = {0, 0, 1, 1};
    p.dataset = cpc::corpus::Dataset::docvqa;
    return p;
  };
  const std::vector<cpc::pairgen::EvalPair> pairs = {make("1", "Doral"), make("2", "Total"), make("3", "Acme"),
                                                     make("4", "Smith")};
  using cpc::harness::PairStatus;
  const std::vector<cpc::harness::PairResponse> responses = {
      {{"1", "Doral", "Doral"}, PairStatus::ok, ""},
      {{"2", "Total", "Total."}, PairStatus::ok, ""},
      {{"3", "acme", "ACME"}, PairStatus::ok, ""},
      {{"4", "Jones", "Smith"}, PairStatus::ok, ""},  // similarity to GT 0.2
  };
  const auto rep = cpc::report::build_report(responses, pairs);
  const auto& d = rep.per_dataset.at(cpc::corpus::Dataset::docvqa);
  const double raw = d.cp_consistency.value_or(-1);
  const double ideal = d.idealized_cp_consistency.value_or(-1);
  return {raw == 0.75 && ideal == 1.0 && d.n_idealized == 3,
          fmt("raw %.2f, idealized %.2f over %zu pairs", raw, ideal, d.n_idealized)};
}

Outcome classifier_coherence() {
  std::mt19937_64 rng(77);
  std::size_t incoherent = 0;
  for (int i = 0; i < 10000; ++i) {
    const m::ResponsePair p{std::to_string(i), random_text(rng, 4), random_text(rng, 8)};
    const bool consistent = m::classify_pattern(p, random_text(rng, 5)) == m::ConflictPattern::consistent;
    incoherent += consistent != (m::delta_containment(p.cognitive_response, p.perceptual_response) == 1);
  }
  struct Fixture {
    m::ResponsePair pair;
    std::string gt;
    m::ConflictPattern expected;
  };
  const std::vector<Fixture> fixtures = {
      {{"p1", "Doraf", "Doral"}, "Doral", m::ConflictPattern::p1_char_error},
      {{"p2", "round in packaging", "round tin packaging"}, "round tin packaging", m::ConflictPattern::p2_cognitive_bias},
      {{"p3", "Marlboro", "Doral"}, "Doral", m::ConflictPattern::p3_limited_cognition},
  };
  std::string labels;
  std::size_t wrong = 0;
  for (const auto& f : fixtures) {
    const auto got = m::classify_pattern(f.pair, f.gt);
    wrong += got != f.expected;
    labels += std::string(labels.empty() ? "" : ", ") + f.pair.pair_id + "=" + std::string(m::to_string(got));
  }
  return {incoherent == 0 && wrong == 0,
          fmt("%zu/10000 label-delta mismatches; fixtures %s", incoherent, labels.c_str())};
}

Outcome harness_robustness() {
  TempDir dir;
  constexpr int n = 100;
  constexpr int max_parallel = 8;
  const auto fx = cpc::testing::make_eval_fixture(dir.path(), n);
  if (fx.pairs.size() != n) return {false, fmt("fixture built %zu pairs", fx.pairs.size())};

  // A call fails when a hash of (image, attempt number for that image) lands
  // in the bottom 10%; the outcome is independent of thread scheduling.
  auto fails = [](const fs::path& image, int attempt) {
    const auto h = cpc::mix_seed(0xfeed, image.string() + "#" + std::to_string(attempt));
    return h % 10 == 0;
  };
  std::map<fs::path, std::string> replies;
  for (const auto& p : fx.pairs) {
    replies[fx.pair_dir / p.plain_image] = p.ground_truth;
    replies[fx.pair_dir / p.boxed_image] = p.box_text;
  }
  std::mutex mu;
  std::map<fs::path, int> attempts;
  std::size_t calls = 0, failed_calls = 0;
  ScriptedEndpoint endpoint(
      [&](std::string_view, std::span<const fs::path> images, int) -> std::string {
        int attempt;
        {
          std::lock_guard lock(mu);
          attempt = attempts[images[0]]++;
          ++calls;
          if (fails(images[0], attempt)) {
            ++failed_calls;
            throw cpc::TransientFailure("HTTP 503");
          }
        }
        return replies.at(images[0]);
      },
      std::chrono::milliseconds(1));
  cpc::harness::ResponseCache cache;
  cpc::harness::RunOptions opts;
  opts.model_name = "flaky";
  opts.max_parallel = max_parallel;
  opts.image_root = fx.pair_dir;
  opts.retry.max_attempts = 2;
  opts.retry.initial_delay = std::chrono::milliseconds(1);
  const auto res = cpc::harness::run_pairs(endpoint, fx.pairs, cache, opts);

  // Expected failures: the cognitive exchange, then the perceptual one, each
  // exhausting both attempts.
  std::size_t expected_failed = 0;
  for (const auto& p : fx.pairs) {
    const bool cog_dead = fails(fx.pair_dir / p.plain_image, 0) && fails(fx.pair_dir / p.plain_image, 1);
    const bool per_dead = fails(fx.pair_dir / p.boxed_image, 0) && fails(fx.pair_dir / p.boxed_image, 1);
    expected_failed += cog_dead || per_dead;
  }
  std::size_t marked = 0;
  for (const auto& r : res.responses) marked += r.status == cpc::harness::PairStatus::failed;
  const int peak = endpoint.peak_in_flight();
  const bool ok = res.responses.size() == n && res.n_failed == expected_failed && marked == expected_failed &&
                  peak <= max_parallel && failed_calls > 0;
  return {ok, fmt("%zu calls, %zu failed transiently (%.1f%%), n_failed %zu (expected %zu), peak in flight %d "
                  "(limit %d)",
                  calls, failed_calls, 100.0 * failed_calls / calls, res.n_failed, expected_failed, peak,
                  max_parallel)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric-oracle-equivalence", anls_oracle_equivalence},
      {"consistency-recount", consistency_recount},
      {"macro-average-75.26", macro_average_row},
      {"end-to-end-mock-evaluation", end_to_end_mock},
      {"training-set-cardinality", training_cardinality},
      {"perturbation-constraints", perturbation_constraints},
      {"renderer-golden-image", renderer_golden},
      {"idealized-filter-semantics", idealized_filter},
      {"pattern-classifier-coherence", classifier_coherence},
      {"harness-robustness", harness_robustness},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
