#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <fstream>

#include "cpc/endpoint.hpp"
#include "cpc/error.hpp"
#include "cpc/ftgen.hpp"
#include "cpc/hash.hpp"

namespace cpc::ftgen {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kKindNames[] = {"cognitive", "perceptual", "connector_pos", "connector_neg"};

std::string rebase(const fs::path& manifest_dir, const std::string& image, const fs::path& out_dir) {
  const fs::path abs = fs::absolute(manifest_dir / image).lexically_normal();
  return abs.lexically_relative(fs::absolute(out_dir).lexically_normal()).generic_string();
}

}  // namespace

std::string_view to_string(RecordKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<RecordKind> record_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == s) return static_cast<RecordKind>(i);
  }
  return std::nullopt;
}

TrainingSet emit_training_set(const std::vector<pairgen::EvalPair>& pairs, std::uint64_t seed,
                              ChatEndpoint* endpoint, const fs::path& out, const TrainingOptions& options) {
  TrainingSet set;
  const fs::path out_dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  if (!out_dir.empty()) fs::create_directories(out_dir);

  for (const auto& pair : pairs) {
    if (pair.split == corpus::Split::test && !options.allow_test_split) {
      set.failures.push_back({pair.pair_id, "pair comes from the test split"});
      continue;
    }
    try {
      const std::string plain = rebase(options.manifest_dir, pair.plain_image, out_dir);
      const std::string boxed = rebase(options.manifest_dir, pair.boxed_image, out_dir);
      const std::string& gt = pair.ground_truth;
      const std::string& box_text = pair.box_text;

      std::array<FtRecord, 4> recs;
      recs[0] = {RecordKind::cognitive, augment_cognitive_query(pair.cognitive_query).query,
                 wrap_link_tokens(gt), plain, pair.pair_id, {}};
      recs[1] = {RecordKind::perceptual, pair.perceptual_query, wrap_link_tokens(box_text), boxed,
                 pair.pair_id, {}};
      const auto pos = make_connector_positive(pair.cognitive_query, gt, box_text, options.templates);
      recs[2] = {RecordKind::connector_pos, pos.query, pos.response, boxed, pair.pair_id, {}};
      const auto perturbation = perturb_answer(gt, mix_seed(seed, pair.pair_id), endpoint, pair.cognitive_query);
      const auto neg = make_connector_negative(pair.cognitive_query, gt, box_text, perturbation.variants[0],
                                               options.templates);
      recs[3] = {RecordKind::connector_neg, neg.query, neg.response, boxed, pair.pair_id,
                 {perturbation.variants[1], perturbation.variants[2]}};
      for (auto& r : recs) set.records.push_back(std::move(r));
    } catch (const Error& e) {
      spdlog::warn("{}: {}", pair.pair_id, e.what());
      set.failures.push_back({pair.pair_id, e.what()});
    }
  }

  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw IoFailure("cannot write " + out.string());
  for (const auto& r : set.records) file << to_training_line(r) << '\n';
  if (!file) throw IoFailure("write failed: " + out.string());
  return set;
}

std::string to_training_line(const FtRecord& r) {
  nlohmann::ordered_json j;
  j["record_kind"] = to_string(r.record_kind);
  j["query"] = r.query;
  j["response"] = r.response;
  j["image"] = r.image;
  j["pair_id"] = r.pair_id;
  if (r.record_kind == RecordKind::connector_neg) j["alternate_negatives"] = r.alternate_negatives;
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

FtRecord parse_training_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    FtRecord r;
    const auto kind = record_kind_from_string(j.at("record_kind").get<std::string>());
    if (!kind) throw MalformedRecord(0, "unknown record_kind");
    r.record_kind = *kind;
    r.query = j.at("query").get<std::string>();
    r.response = j.at("response").get<std::string>();
    r.image = j.at("image").get<std::string>();
    r.pair_id = j.at("pair_id").get<std::string>();
    if (j.contains("alternate_negatives")) r.alternate_negatives = j.at("alternate_negatives").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord(0, e.what());
  }
}

}  // namespace cpc::ftgen
