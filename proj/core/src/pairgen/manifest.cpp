#include <nlohmann/json.hpp>

#include <fstream>

#include "cpc/error.hpp"
#include "cpc/pairgen.hpp"

namespace cpc::pairgen {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string str(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw std::invalid_argument(std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

std::string to_manifest_line(const EvalPair& p) {
  ordered_json j;
  j["pair_id"] = p.pair_id;
  j["record_id"] = p.record_id;
  j["cognitive_query"] = p.cognitive_query;
  j["perceptual_query"] = p.perceptual_query;
  j["ground_truth"] = p.ground_truth;
  j["box"] = {p.box.x_min, p.box.y_min, p.box.x_max, p.box.y_max};
  j["plain_image"] = p.plain_image;
  j["boxed_image"] = p.boxed_image;
  j["locator"] = to_string(p.locator);
  j["dataset"] = corpus::to_string(p.dataset);
  j["split"] = corpus::to_string(p.split);
  j["box_text"] = p.box_text;
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::strict);
}

EvalPair parse_manifest_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    if (!j.is_object()) throw std::invalid_argument("not a JSON object");
    EvalPair p;
    p.pair_id = str(j, "pair_id");
    p.record_id = str(j, "record_id");
    p.cognitive_query = str(j, "cognitive_query");
    p.perceptual_query = str(j, "perceptual_query");
    p.ground_truth = str(j, "ground_truth");
    const auto& b = j.at("box");
    if (!b.is_array() || b.size() != 4) throw std::invalid_argument("box must have 4 integers");
    p.box = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
    if (!p.box.well_formed()) throw std::invalid_argument("box is not well formed");
    p.plain_image = str(j, "plain_image");
    p.boxed_image = str(j, "boxed_image");
    const auto loc = locator_from_string(str(j, "locator"));
    if (!loc) throw std::invalid_argument("unknown locator");
    p.locator = *loc;
    if (j.contains("dataset")) {
      const auto d = corpus::dataset_from_string(str(j, "dataset"));
      if (!d) throw std::invalid_argument("unknown dataset");
      p.dataset = *d;
    }
    if (j.contains("split")) {
      const auto s = corpus::split_from_string(str(j, "split"));
      if (!s) throw std::invalid_argument("unknown split");
      p.split = *s;
    }
    p.box_text = j.contains("box_text") ? str(j, "box_text") : p.ground_truth;
    if (p.pair_id.empty()) throw std::invalid_argument("empty pair_id");
    return p;
  } catch (const json::exception& e) {
    throw MalformedRecord(0, e.what());
  } catch (const std::invalid_argument& e) {
    throw MalformedRecord(0, e.what());
  }
}

void write_manifest(const std::vector<EvalPair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  for (const auto& p : pairs) out << to_manifest_line(p) << '\n';
  if (!out) throw IoFailure("write failed: " + path.string());
}

std::vector<EvalPair> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::vector<EvalPair> pairs;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      pairs.push_back(parse_manifest_line(line));
    } catch (const MalformedRecord& e) {
      throw MalformedRecord(n, e.reason());
    }
  }
  return pairs;
}

}  // namespace cpc::pairgen
