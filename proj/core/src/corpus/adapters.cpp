#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "cpc/corpus.hpp"
#include "cpc/error.hpp"
#include "cpc/image.hpp"

namespace cpc::corpus {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SourceLayoutMismatch("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SourceLayoutMismatch(path.string() + ": " + e.what());
  }
}

std::vector<json> read_json_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SourceLayoutMismatch("cannot open " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw SourceLayoutMismatch(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw SourceLayoutMismatch("expected file " + p.string());
}

void require_dir(const fs::path& p) {
  if (!fs::is_directory(p)) throw SourceLayoutMismatch("expected directory " + p.string());
}

std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos; }

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return v.dump();
  return {};
}

// Collects tokens for one page: drops blank or degenerate ones and
// renumbers the survivors densely in source order.
class PageBuilder {
 public:
  PageBuilder(CanonicalRecord& record, std::size_t& dropped) : record_(record), dropped_(dropped) {}

  void add(const std::string& text, double x0, double y0, double x1, double y1) {
    const int w = record_.image_width;
    const int h = record_.image_height;
    BoundingBox b{
        std::clamp(static_cast<int>(std::floor(std::min(x0, x1))), 0, w),
        std::clamp(static_cast<int>(std::floor(std::min(y0, y1))), 0, h),
        std::clamp(static_cast<int>(std::ceil(std::max(x0, x1))), 0, w),
        std::clamp(static_cast<int>(std::ceil(std::max(y0, y1))), 0, h),
    };
    if (blank(text) || !b.within(w, h)) {
      ++dropped_;
      return;
    }
    record_.ocr_tokens.push_back({static_cast<int>(record_.ocr_tokens.size()), text, b});
  }

  // [x0,y0,x1,y1] or an 8-value polygon.
  void add_coords(const std::string& text, const json& coords) {
    if (!coords.is_array() || (coords.size() != 4 && coords.size() != 8)) {
      ++dropped_;
      return;
    }
    std::vector<double> v;
    for (const auto& c : coords) {
      if (!c.is_number()) {
        ++dropped_;
        return;
      }
      v.push_back(c.get<double>());
    }
    if (v.size() == 4) {
      add(text, v[0], v[1], v[2], v[3]);
      return;
    }
    double x0 = v[0], x1 = v[0], y0 = v[1], y1 = v[1];
    for (std::size_t i = 0; i < 8; i += 2) {
      x0 = std::min(x0, v[i]);
      x1 = std::max(x1, v[i]);
      y0 = std::min(y0, v[i + 1]);
      y1 = std::max(y1, v[i + 1]);
    }
    add(text, x0, y0, x1, y1);
  }

 private:
  CanonicalRecord& record_;
  std::size_t& dropped_;
};

// Token file in the canonical token shape: [{"text", "box"}, ...]; token_id is ignored.
void load_token_file(const fs::path& path, PageBuilder& page) {
  const json j = read_json(path);
  const json& tokens = j.is_object() && j.contains("ocr_tokens") ? j.at("ocr_tokens") : j;
  if (!tokens.is_array()) throw SourceLayoutMismatch(path.string() + ": expected a token array");
  for (const auto& t : tokens) {
    if (!t.is_object() || !t.contains("text") || !t.contains("box")) {
      throw SourceLayoutMismatch(path.string() + ": token needs \"text\" and \"box\"");
    }
    page.add_coords(scalar_text(t.at("text")), t.at("box"));
  }
}

CanonicalRecord new_record(const fs::path& source, const fs::path& image, std::string record_id,
                           Dataset dataset, Split split) {
  if (!fs::is_regular_file(image)) throw SourceLayoutMismatch("missing image " + image.string());
  CanonicalRecord r;
  r.record_id = std::move(record_id);
  r.dataset = dataset;
  r.split = split;
  r.image_path = image.lexically_relative(source).generic_string();
  try {
    const auto size = png_size(image);
    r.image_width = size.width;
    r.image_height = size.height;
  } catch (const ImageDecodeFailure& e) {
    throw SourceLayoutMismatch(e.what());
  }
  return r;
}

bool add_qa(CanonicalRecord& r, std::string qa_id, std::string question, std::string answer, int page,
            AdaptResult& out) {
  if (blank(question) || blank(answer) || blank(qa_id)) {
    ++out.dropped_qa;
    return false;
  }
  r.qa.push_back({std::move(qa_id), std::move(question), std::move(answer), page});
  return true;
}

void finish(std::vector<CanonicalRecord>& records, AdaptResult& out) {
  for (auto& r : records) {
    if (auto err = validate(r)) throw SourceLayoutMismatch(r.record_id + ": " + *err);
    out.records.push_back(std::move(r));
  }
}

// <split>_v1.0.json {"data": [{questionId, question, image, answers}]},
// OCR under ocr_results/<image stem>.json (recognitionResults/lines/words).
AdaptResult adapt_docvqa(const AdapterDescriptor& d) {
  AdaptResult out;
  const fs::path ann = d.source / (std::string(to_string(d.split)) + "_v1.0.json");
  require_file(ann);
  const json root = read_json(ann);
  if (!root.is_object() || !root.contains("data") || !root.at("data").is_array()) {
    throw SourceLayoutMismatch(ann.string() + ": expected {\"data\": [...]}");
  }

  std::vector<CanonicalRecord> records;
  std::map<std::string, std::size_t> by_image;
  for (const auto& q : root.at("data")) {
    if (!q.is_object() || !q.contains("image") || !q.contains("question") || !q.contains("questionId")) {
      throw SourceLayoutMismatch(ann.string() + ": entry needs questionId, question, image");
    }
    const std::string image = q.at("image").get<std::string>();
    auto [it, inserted] = by_image.try_emplace(image, records.size());
    if (inserted) {
      const fs::path img = d.source / image;
      records.push_back(new_record(d.source, img, img.stem().string(), Dataset::docvqa, d.split));
      auto& r = records.back();
      PageBuilder page(r, out.dropped_tokens);
      const fs::path ocr = d.source / "ocr_results" / (img.stem().string() + ".json");
      if (fs::is_regular_file(ocr)) {
        const json o = read_json(ocr);
        for (const auto& res : o.value("recognitionResults", json::array())) {
          for (const auto& line : res.value("lines", json::array())) {
            for (const auto& w : line.value("words", json::array())) {
              page.add_coords(scalar_text(w.value("text", json())), w.value("boundingBox", json()));
            }
          }
        }
      } else {
        out.warnings.push_back("no OCR for " + image);
      }
    }
    const auto answers = q.value("answers", json::array());
    const std::string answer = answers.empty() ? std::string() : scalar_text(answers.front());
    add_qa(records[it->second], scalar_text(q.at("questionId")), q.at("question").get<std::string>(),
           answer, 0, out);
  }
  finish(records, out);
  return out;
}

// <split>.json [{questionId, question, answers, answers_page_bounding_boxes, docId}],
// pages at images/<docId>_<page>.png, tokens at ocr/<docId>_<page>.json.
AdaptResult adapt_dude(const AdapterDescriptor& d) {
  AdaptResult out;
  const fs::path ann = d.source / (std::string(to_string(d.split)) + ".json");
  require_file(ann);
  const json root = read_json(ann);
  const json& items = root.is_object() && root.contains("data") ? root.at("data") : root;
  if (!items.is_array()) throw SourceLayoutMismatch(ann.string() + ": expected an array of questions");

  std::vector<CanonicalRecord> records;
  std::map<std::string, std::size_t> by_page;
  for (const auto& q : items) {
    if (!q.is_object() || !q.contains("docId") || !q.contains("question") || !q.contains("questionId")) {
      throw SourceLayoutMismatch(ann.string() + ": entry needs questionId, question, docId");
    }
    std::set<int> pages;
    for (const auto& per_answer : q.value("answers_page_bounding_boxes", json::array())) {
      for (const auto& b : per_answer) {
        if (b.is_object() && b.contains("page") && b.at("page").is_number_integer()) {
          pages.insert(b.at("page").get<int>());
        }
      }
    }
    if (pages.size() != 1) {
      ++out.dropped_qa;
      continue;
    }
    const int page_no = *pages.begin();
    const std::string doc = q.at("docId").get<std::string>();
    const std::string stem = doc + "_" + std::to_string(page_no);
    auto [it, inserted] = by_page.try_emplace(stem, records.size());
    if (inserted) {
      records.push_back(
          new_record(d.source, d.source / "images" / (stem + ".png"), stem, Dataset::dude, d.split));
      PageBuilder page(records.back(), out.dropped_tokens);
      const fs::path ocr = d.source / "ocr" / (stem + ".json");
      if (fs::is_regular_file(ocr)) {
        load_token_file(ocr, page);
      } else {
        out.warnings.push_back("no OCR for " + stem);
      }
    }
    const auto answers = q.value("answers", json::array());
    const std::string answer = answers.empty() ? std::string() : scalar_text(answers.front());
    add_qa(records[it->second], scalar_text(q.at("questionId")), q.at("question").get<std::string>(),
           answer, page_no, out);
  }
  finish(records, out);
  return out;
}

// <split>.jsonl lines {doc_id, pages: [png paths], fields: {key: value}},
// tokens at ocr/<page stem>.json.
AdaptResult adapt_deepform(const AdapterDescriptor& d, ChatEndpoint* endpoint) {
  AdaptResult out;
  const fs::path ann = d.source / (std::string(to_string(d.split)) + ".jsonl");
  require_file(ann);

  std::vector<CanonicalRecord> records;
  for (const auto& doc : read_json_lines(ann)) {
    if (!doc.is_object() || !doc.contains("doc_id") || !doc.contains("pages") || !doc.contains("fields")) {
      throw SourceLayoutMismatch(ann.string() + ": document needs doc_id, pages, fields");
    }
    const std::string doc_id = doc.at("doc_id").get<std::string>();
    std::vector<CanonicalRecord> pages;
    for (const auto& p : doc.at("pages")) {
      const fs::path img = d.source / p.get<std::string>();
      pages.push_back(new_record(d.source, img, doc_id + "_p" + std::to_string(pages.size()),
                                 Dataset::deepform, d.split));
      PageBuilder page(pages.back(), out.dropped_tokens);
      const fs::path ocr = d.source / "ocr" / (img.stem().string() + ".json");
      if (fs::is_regular_file(ocr)) {
        load_token_file(ocr, page);
      } else {
        out.warnings.push_back("no OCR for " + img.stem().string());
      }
    }
    if (pages.empty()) {
      out.warnings.push_back(doc_id + ": no pages");
      continue;
    }

    std::vector<QaAnnotation> qa;
    for (const auto& [key, value] : doc.at("fields").items()) {
      const std::string answer = scalar_text(value);
      if (blank(answer)) {
        ++out.dropped_qa;
        continue;
      }
      qa.push_back({doc_id + ":" + key, "What is the value for the '" + key + "'?", answer, 0});
    }
    if (qa.empty()) continue;

    auto selection = select_deepform_page(pages, qa, endpoint, d.source);
    for (auto& w : selection.warnings) out.warnings.push_back(doc_id + ": " + w);
    for (std::size_t i = 0; i < qa.size(); ++i) {
      const int page = selection.assignments[i].page_index;
      add_qa(pages[static_cast<std::size_t>(page)], qa[i].qa_id, qa[i].question, qa[i].answer, page, out);
    }
    for (auto& p : pages) {
      if (!p.qa.empty()) records.push_back(std::move(p));
    }
  }
  finish(records, out);
  return out;
}

// <training_data|testing_data>/annotations/*.json with form entities and
// question->answer links, images/<stem>.png; ocr/<stem>.json overrides the
// entity words when present.
AdaptResult adapt_funsd(const AdapterDescriptor& d) {
  AdaptResult out;
  const fs::path base = d.source / (d.split == Split::train ? "training_data" : "testing_data");
  require_dir(base / "annotations");
  require_dir(base / "images");

  std::vector<CanonicalRecord> records;
  for (const auto& ann : sorted_files(base / "annotations", ".json")) {
    const std::string stem = ann.stem().string();
    const json root = read_json(ann);
    if (!root.is_object() || !root.contains("form") || !root.at("form").is_array()) {
      throw SourceLayoutMismatch(ann.string() + ": expected {\"form\": [...]}");
    }
    auto r = new_record(d.source, base / "images" / (stem + ".png"), stem, Dataset::funsd, d.split);
    PageBuilder page(r, out.dropped_tokens);
    const fs::path ocr = base / "ocr" / (stem + ".json");

    std::map<int, const json*> entities;
    for (const auto& e : root.at("form")) {
      entities[e.value("id", -1)] = &e;
      if (fs::is_regular_file(ocr)) continue;
      for (const auto& w : e.value("words", json::array())) {
        page.add_coords(scalar_text(w.value("text", json())), w.value("box", json()));
      }
    }
    if (fs::is_regular_file(ocr)) load_token_file(ocr, page);

    std::set<std::pair<int, int>> links;
    for (const auto& e : root.at("form")) {
      for (const auto& l : e.value("linking", json::array())) {
        if (l.is_array() && l.size() == 2) links.emplace(l[0].get<int>(), l[1].get<int>());
      }
    }
    for (const auto& [qid, aid] : links) {
      const auto q = entities.find(qid);
      const auto a = entities.find(aid);
      if (q == entities.end() || a == entities.end()) continue;
      if (q->second->value("label", "") != "question" || a->second->value("label", "") != "answer") continue;
      add_qa(r, stem + ":" + std::to_string(qid) + "-" + std::to_string(aid),
             q->second->value("text", ""), a->second->value("text", ""), 0, out);
    }
    records.push_back(std::move(r));
  }
  finish(records, out);
  return out;
}

// <split>/<split>_human.json and/or <split>/<split>_augmented.json with
// [{imgname, query, label}], images at <split>/png, tokens at <split>/ocr/<stem>.json.
AdaptResult adapt_chartqa(const AdapterDescriptor& d) {
  AdaptResult out;
  const std::string split(to_string(d.split));
  const fs::path base = d.source / split;
  require_dir(base / "png");

  std::vector<CanonicalRecord> records;
  std::map<std::string, std::size_t> by_image;
  bool any = false;
  for (const std::string part : {"human", "augmented"}) {
    const fs::path ann = base / (split + "_" + part + ".json");
    if (!fs::is_regular_file(ann)) continue;
    any = true;
    const json items = read_json(ann);
    if (!items.is_array()) throw SourceLayoutMismatch(ann.string() + ": expected an array");
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& q = items[i];
      if (!q.is_object() || !q.contains("imgname") || !q.contains("query") || !q.contains("label")) {
        throw SourceLayoutMismatch(ann.string() + ": entry needs imgname, query, label");
      }
      const fs::path img = base / "png" / q.at("imgname").get<std::string>();
      auto [it, inserted] = by_image.try_emplace(img.filename().string(), records.size());
      if (inserted) {
        records.push_back(new_record(d.source, img, img.stem().string(), Dataset::chartqa, d.split));
        PageBuilder page(records.back(), out.dropped_tokens);
        const fs::path ocr = base / "ocr" / (img.stem().string() + ".json");
        if (fs::is_regular_file(ocr)) {
          load_token_file(ocr, page);
        } else {
          out.warnings.push_back("no OCR for " + img.filename().string());
        }
      }
      add_qa(records[it->second], part + "-" + std::to_string(i), scalar_text(q.at("query")),
             scalar_text(q.at("label")), 0, out);
    }
  }
  if (!any) throw SourceLayoutMismatch("no " + split + "_human.json or " + split + "_augmented.json in " + base.string());
  finish(records, out);
  return out;
}

// records.jsonl in the canonical format; records of the requested split only.
AdaptResult adapt_custom(const AdapterDescriptor& d) {
  const fs::path file = d.source / "records.jsonl";
  require_file(file);
  AdaptResult out;
  try {
    for (auto& r : parse_canonical(file)) {
      if (r.split == d.split) out.records.push_back(std::move(r));
    }
  } catch (const MalformedRecord& e) {
    throw SourceLayoutMismatch(e.what());
  } catch (const MissingImage& e) {
    throw SourceLayoutMismatch(e.what());
  }
  return out;
}

using AdapterFn = std::function<AdaptResult(const AdapterDescriptor&, ChatEndpoint*)>;

const std::map<std::string, AdapterFn, std::less<>>& registry() {
  static const std::map<std::string, AdapterFn, std::less<>> r = {
      {"chartqa", [](const auto& d, auto*) { return adapt_chartqa(d); }},
      {"custom", [](const auto& d, auto*) { return adapt_custom(d); }},
      {"deepform", [](const auto& d, auto* e) { return adapt_deepform(d, e); }},
      {"docvqa", [](const auto& d, auto*) { return adapt_docvqa(d); }},
      {"dude", [](const auto& d, auto*) { return adapt_dude(d); }},
      {"funsd", [](const auto& d, auto*) { return adapt_funsd(d); }},
  };
  return r;
}

}  // namespace

AdaptResult adapt_dataset(const AdapterDescriptor& descriptor, ChatEndpoint* endpoint) {
  const auto it = registry().find(descriptor.adapter);
  if (it == registry().end()) throw UnknownAdapter(descriptor.adapter);
  require_dir(descriptor.source);
  AdaptResult result;
  try {
    result = it->second(descriptor, endpoint);
  } catch (const json::exception& e) {
    throw SourceLayoutMismatch(descriptor.source.string() + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw SourceLayoutMismatch(e.what());
  }
  for (const auto& w : result.warnings) spdlog::warn("{}: {}", descriptor.adapter, w);
  return result;
}

std::vector<std::string> adapter_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

}  // namespace cpc::corpus
