#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "cpc/corpus.hpp"
#include "cpc/error.hpp"
#include "cpc/hash.hpp"

namespace cpc::corpus {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct FieldError {
  std::string reason;
};

void expect_keys(const json& j, std::initializer_list<std::string_view> keys, std::string_view what) {
  if (!j.is_object()) throw FieldError{std::string(what) + " must be an object"};
  for (auto k : keys) {
    if (!j.contains(k)) throw FieldError{std::string(what) + " is missing key \"" + std::string(k) + "\""};
  }
  if (j.size() != keys.size()) {
    for (const auto& [k, v] : j.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw FieldError{std::string(what) + " has unexpected key \"" + k + "\""};
      }
    }
  }
}

int get_int(const json& j, std::string_view key) {
  const auto& v = j.at(std::string(key));
  if (!v.is_number_integer()) throw FieldError{"\"" + std::string(key) + "\" must be an integer"};
  const auto n = v.get<std::int64_t>();
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
    throw FieldError{"\"" + std::string(key) + "\" is out of range"};
  }
  return static_cast<int>(n);
}

std::string get_string(const json& j, std::string_view key) {
  const auto& v = j.at(std::string(key));
  if (!v.is_string()) throw FieldError{"\"" + std::string(key) + "\" must be a string"};
  return v.get<std::string>();
}

BoundingBox parse_box(const json& j) {
  if (!j.is_array() || j.size() != 4) throw FieldError{"box must be [x_min, y_min, x_max, y_max]"};
  std::array<int, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[i].is_number_integer()) throw FieldError{"box coordinates must be integers"};
    v[i] = j[i].get<int>();
  }
  BoundingBox b{v[0], v[1], v[2], v[3]};
  if (b.x_min >= b.x_max || b.y_min >= b.y_max) throw FieldError{"box requires x_min < x_max and y_min < y_max"};
  if (b.x_min < 0 || b.y_min < 0) throw FieldError{"box coordinates must be non-negative"};
  return b;
}

CanonicalRecord record_from_json(const json& j) {
  expect_keys(j, {"record_id", "dataset", "split", "image_path", "image_width", "image_height", "ocr_tokens", "qa"},
              "record");
  CanonicalRecord r;
  r.record_id = get_string(j, "record_id");
  const auto ds = dataset_from_string(get_string(j, "dataset"));
  if (!ds) throw FieldError{"unknown dataset \"" + j.at("dataset").get<std::string>() + "\""};
  r.dataset = *ds;
  const auto sp = split_from_string(get_string(j, "split"));
  if (!sp) throw FieldError{"unknown split \"" + j.at("split").get<std::string>() + "\""};
  r.split = *sp;
  r.image_path = get_string(j, "image_path");
  r.image_width = get_int(j, "image_width");
  r.image_height = get_int(j, "image_height");

  const auto& tokens = j.at("ocr_tokens");
  if (!tokens.is_array()) throw FieldError{"ocr_tokens must be an array"};
  for (const auto& t : tokens) {
    expect_keys(t, {"token_id", "text", "box"}, "ocr token");
    r.ocr_tokens.push_back({get_int(t, "token_id"), get_string(t, "text"), parse_box(t.at("box"))});
  }
  const auto& qas = j.at("qa");
  if (!qas.is_array()) throw FieldError{"qa must be an array"};
  for (const auto& q : qas) {
    expect_keys(q, {"qa_id", "question", "answer", "page_index"}, "qa");
    r.qa.push_back({get_string(q, "qa_id"), get_string(q, "question"), get_string(q, "answer"),
                    get_int(q, "page_index")});
  }
  if (auto problem = validate(r)) throw FieldError{*problem};
  return r;
}

ordered_json record_to_json(const CanonicalRecord& r) {
  ordered_json j;
  j["record_id"] = r.record_id;
  j["dataset"] = std::string(to_string(r.dataset));
  j["split"] = std::string(to_string(r.split));
  j["image_path"] = r.image_path;
  j["image_width"] = r.image_width;
  j["image_height"] = r.image_height;
  auto tokens = ordered_json::array();
  for (const auto& t : r.ocr_tokens) {
    ordered_json tj;
    tj["token_id"] = t.token_id;
    tj["text"] = t.text;
    tj["box"] = {t.box.x_min, t.box.y_min, t.box.x_max, t.box.y_max};
    tokens.push_back(std::move(tj));
  }
  j["ocr_tokens"] = std::move(tokens);
  auto qas = ordered_json::array();
  for (const auto& q : r.qa) {
    ordered_json qj;
    qj["qa_id"] = q.qa_id;
    qj["question"] = q.question;
    qj["answer"] = q.answer;
    qj["page_index"] = q.page_index;
    qas.push_back(std::move(qj));
  }
  j["qa"] = std::move(qas);
  return j;
}

// Parses all lines; `on_record` sees each record with its line number.
template <typename OnRecord>
std::vector<CanonicalRecord> parse_lines(std::string_view text, OnRecord on_record) {
  std::vector<CanonicalRecord> out;
  std::set<std::tuple<Dataset, Split, std::string>> record_ids;
  std::set<std::tuple<Dataset, Split, std::string>> qa_ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    try {
      if (line.empty()) throw FieldError{"blank line"};
      auto rec = record_from_json(json::parse(line));
      if (!record_ids.emplace(rec.dataset, rec.split, rec.record_id).second) {
        throw FieldError{"duplicate record_id " + rec.record_id};
      }
      for (const auto& q : rec.qa) {
        if (!qa_ids.emplace(rec.dataset, rec.split, q.qa_id).second) throw FieldError{"duplicate qa_id " + q.qa_id};
      }
      on_record(rec, line_no);
      out.push_back(std::move(rec));
    } catch (const FieldError& e) {
      throw MalformedRecord(line_no, e.reason);
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<CanonicalRecord> parse_canonical_text(std::string_view text) {
  return parse_lines(text, [](const CanonicalRecord&, std::size_t) {});
}

std::vector<CanonicalRecord> parse_canonical(const std::filesystem::path& path, const ParseOptions& options) {
  if (!std::filesystem::is_regular_file(path)) throw IoFailure("no such file " + path.string());
  const std::string text = read_file_bytes(path);
  const auto base = path.parent_path();
  return parse_lines(text, [&](const CanonicalRecord& r, std::size_t) {
    if (!options.check_images) return;
    const auto image = base / r.image_path;
    if (!std::filesystem::is_regular_file(image)) throw MissingImage(image);
  });
}

std::string to_canonical_line(const CanonicalRecord& record) {
  if (auto problem = validate(record)) throw MalformedRecord(0, *problem);
  try {
    return record_to_json(record).dump(-1, ' ', false, ordered_json::error_handler_t::strict);
  } catch (const ordered_json::exception& e) {
    throw MalformedRecord(0, e.what());
  }
}

void emit_canonical(const std::vector<CanonicalRecord>& records, const std::filesystem::path& path) {
  std::string text;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      text += to_canonical_line(records[i]);
    } catch (const MalformedRecord& e) {
      throw MalformedRecord(i + 1, e.reason());
    }
    text.push_back('\n');
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoFailure("cannot write " + path.string());
}

}  // namespace cpc::corpus
