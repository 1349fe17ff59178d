#include <spdlog/spdlog.h>

#include "cpc/endpoint.hpp"
#include "cpc/error.hpp"
#include "cpc/hash.hpp"
#include "cpc/pairgen.hpp"

namespace cpc::pairgen {
namespace {

namespace fs = std::filesystem;

std::string file_stem_for(const std::string& pair_id) {
  std::string s;
  for (char c : pair_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    s.push_back(ok ? c : '_');
  }
  if (s.size() > 80) s.resize(80);
  // The hash suffix keeps ids that sanitize alike apart.
  return s + "-" + sha256_hex(pair_id).substr(0, 8);
}

}  // namespace

BuildResult build_eval_pairs(const std::vector<corpus::CanonicalRecord>& records, ChatEndpoint* endpoint,
                             const fs::path& out_dir, const BuildOptions& options) {
  BuildResult result;
  fs::create_directories(out_dir / "images");
  const fs::path out_abs = fs::absolute(out_dir).lexically_normal();

  for (const auto& record : records) {
    const fs::path plain = options.image_root / record.image_path;
    std::vector<QaVerdict> verdicts;
    try {
      verdicts = filter_extractive(record, endpoint, options.image_root);
    } catch (const EndpointFailure& e) {
      spdlog::warn("{}: filter skipped record: {}", record.record_id, e.what());
      result.failures.push_back({record.record_id, e.what()});
      continue;
    }

    std::size_t emitted = 0;
    for (std::size_t i = 0; i < record.qa.size(); ++i) {
      const auto& qa = record.qa[i];
      if (!verdicts[i].keep) {
        ++result.dropped_non_extractive;
        continue;
      }
      ++result.kept_qa;

      LocatorResult loc = locate_box(record, qa.answer);
      if (loc.confidence != Confidence::unique && endpoint != nullptr) {
        try {
          loc = locate_box_llm(record, qa, loc.candidates, *endpoint, options.image_root);
        } catch (const EndpointFailure& e) {
          spdlog::warn("{}/{}: locator failed: {}", record.record_id, qa.qa_id, e.what());
          result.failures.push_back({record.record_id, qa.qa_id + ": " + e.what()});
          ++result.dropped_unlocated;
          continue;
        }
      }
      if (loc.confidence != Confidence::unique || (loc.tier == Locator::fuzzy && !options.allow_fuzzy)) {
        ++result.dropped_unlocated;
        continue;
      }

      EvalPair pair;
      pair.pair_id = record.record_id + ":" + qa.qa_id;
      pair.record_id = record.record_id;
      pair.cognitive_query = qa.question;
      pair.perceptual_query = std::string(kPerceptualQuestion);
      pair.ground_truth = qa.answer;
      pair.box = loc.merged_box;
      pair.locator = loc.tier;
      pair.dataset = record.dataset;
      pair.split = record.split;
      pair.box_text = loc.merged_text;

      const fs::path boxed = out_dir / "images" / (file_stem_for(pair.pair_id) + ".png");
      try {
        render_visual_prompt(plain, loc.merged_box, boxed);
      } catch (const Error& e) {
        spdlog::warn("{}: render failed: {}", pair.pair_id, e.what());
        result.failures.push_back({record.record_id, qa.qa_id + ": " + e.what()});
        continue;
      }
      pair.plain_image = fs::absolute(plain).lexically_normal().lexically_relative(out_abs).generic_string();
      pair.boxed_image = boxed.lexically_relative(out_dir).generic_string();
      result.pairs.push_back(std::move(pair));
      ++emitted;
    }
    if (emitted > 0) ++result.images;
  }

  write_manifest(result.pairs, out_dir / kManifestName);
  return result;
}

}  // namespace cpc::pairgen
