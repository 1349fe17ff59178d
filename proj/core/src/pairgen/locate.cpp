#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <regex>
#include <set>

#include "cpc/endpoint.hpp"
#include "cpc/metrics.hpp"
#include "cpc/pairgen.hpp"

namespace cpc::pairgen {
namespace {

constexpr std::string_view kBoxLocatorPrompt =
    "You are tasked with identifying the locations of answers to multiple questions about a document image.\n"
    "\n"
    "**You have been provided with the following:**\n"
    "1. The document image.\n"
    "2. A list of questions along with their corresponding answers.\n"
    "3. Text extracted from the document image using an Optical Character Recognition (OCR) engine by a third "
    "party.\n"
    "\n"
    "**Here are the questions and answers:**\n"
    "{Question_Answering}\n"
    "\n"
    "**Here is the text extracted by the OCR engine:**\n"
    "{OCR_Text}\n"
    "\n"
    "**Your task:**\n"
    "For each question in the list, first determine whether the answer text can be found within the document "
    "image based on the OCR-extracted text. If the answer is present, identify the box ID(s) that contain the "
    "correct answer. Each answer appears **only once** in the document image and may be entirely within a "
    "single box or span multiple adjacent boxes, either horizontally or vertically. Include all relevant box "
    "IDs that collectively constitute the answer. If the answer text cannot be found in any box, indicate this "
    "as well.\n"
    "\n"
    "**It is important to emphasize that you should identify only the boxes that contain the correct answer "
    "text, not the boxes that are relevant to answering the question.** In other words, even if a question "
    "explicitly mentions a specific box, if the answer text does not appear in that box, it should not be "
    "considered.\n"
    "\n"
    "Keep in mind that you need to find the box that semantically matches the answer, not just the box with "
    "the answer text. This means you should fully consider all the information from the document image, "
    "including images, text, layout, and style.\n"
    "\n"
    "\n"
    "**Important:**\n"
    "- **Do not include any explanatory content in your response.**\n"
    "- **Respond in the following format for each question:**\n"
    "- If you find the box(es) containing the true answer, respond with: \"Found [Box IDs]\"\n"
    "- If you cannot find any boxes containing the true answer, respond with: \"Not Found\"\n"
    "\n"
    "**Example Response:**\n"
    "Q1: Found [9, 12]\n"
    "Q2: Not Found\n"
    "Q3: Found [15]";

TokenRun make_run(const corpus::CanonicalRecord& record, std::vector<int> ids) {
  TokenRun run;
  run.token_ids = std::move(ids);
  for (std::size_t k = 0; k < run.token_ids.size(); ++k) {
    const auto& t = record.ocr_tokens[static_cast<std::size_t>(run.token_ids[k])];
    run.box = k == 0 ? t.box : corpus::union_of(run.box, t.box);
    if (k > 0) run.text.push_back(' ');
    run.text += t.text;
  }
  return run;
}

std::vector<int> iota_ids(std::size_t first, std::size_t last) {
  std::vector<int> ids;
  for (std::size_t i = first; i <= last; ++i) ids.push_back(static_cast<int>(i));
  return ids;
}

std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto j = s.find(' ', i);
    if (j == std::string::npos) j = s.size();
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

// Smallest windows [i, j] whose space-joined text contains `target`.
std::vector<std::pair<std::size_t, std::size_t>> exact_windows(const std::vector<std::string>& norm,
                                                               const std::string& target) {
  std::vector<std::pair<std::size_t, std::size_t>> found;
  const std::size_t n = norm.size();
  auto contains = [&](std::size_t i, std::size_t j) {
    std::string s;
    for (std::size_t k = i; k <= j; ++k) {
      if (k > i) s.push_back(' ');
      s += norm[k];
    }
    return s.find(target) != std::string::npos;
  };
  for (std::size_t i = 0; i < n; ++i) {
    // A minimal window overlaps the target at both ends, so its interior is
    // shorter than the target.
    std::size_t interior = 0;
    for (std::size_t j = i; j < n; ++j) {
      if (j >= i + 2) interior += norm[j - 1].size() + (j - 1 > i + 1 ? 1 : 0);
      if (j >= i + 2 && interior >= target.size()) break;
      if (contains(i, j)) {
        if (j == i || !contains(i + 1, j)) found.emplace_back(i, j);
        break;
      }
    }
  }
  return found;
}

std::vector<std::pair<std::size_t, std::size_t>> fuzzy_windows(const std::vector<std::string>& norm,
                                                               const std::string& target) {
  std::vector<std::pair<std::size_t, std::size_t>> found;
  const auto words = split_spaces(target);
  if (words.empty() || words.size() > norm.size()) return found;
  for (std::size_t i = 0; i + words.size() <= norm.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < words.size() && ok; ++k) {
      const auto w = metrics::to_scalars(words[k]);
      const auto t = metrics::to_scalars(norm[i + k]);
      const auto d = metrics::levenshtein(std::u32string_view(w), std::u32string_view(t));
      ok = w.size() > 1 ? d <= 1 : d == 0;
    }
    if (ok) found.emplace_back(i, i + words.size() - 1);
  }
  return found;
}

void fill_result(LocatorResult& r, const corpus::CanonicalRecord& record,
                 const std::vector<std::pair<std::size_t, std::size_t>>& windows, Locator tier) {
  r.tier = tier;
  for (const auto& [i, j] : windows) r.candidates.push_back(make_run(record, iota_ids(i, j)));
  if (r.candidates.size() == 1) {
    r.confidence = Confidence::unique;
    r.token_ids = r.candidates[0].token_ids;
    r.merged_box = r.candidates[0].box;
    r.merged_text = r.candidates[0].text;
  } else {
    r.confidence = Confidence::ambiguous;
  }
}

}  // namespace

std::string_view to_string(Locator l) {
  switch (l) {
    case Locator::exact: return "exact";
    case Locator::fuzzy: return "fuzzy";
    case Locator::llm: return "llm";
  }
  return "exact";
}

std::optional<Locator> locator_from_string(std::string_view s) {
  for (auto l : {Locator::exact, Locator::fuzzy, Locator::llm}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::unique: return "unique";
    case Confidence::ambiguous: return "ambiguous";
    case Confidence::none: return "none";
  }
  return "none";
}

LocatorResult locate_box(const corpus::CanonicalRecord& record, std::string_view answer) {
  LocatorResult r;
  const std::string target = metrics::normalize(answer);
  if (target.empty() || record.ocr_tokens.empty()) return r;
  std::vector<std::string> norm;
  norm.reserve(record.ocr_tokens.size());
  for (const auto& t : record.ocr_tokens) norm.push_back(metrics::normalize(t.text));

  if (auto w = exact_windows(norm, target); !w.empty()) {
    fill_result(r, record, w, Locator::exact);
  } else if (auto f = fuzzy_windows(norm, target); !f.empty()) {
    fill_result(r, record, f, Locator::fuzzy);
  }
  return r;
}

std::string box_locator_prompt(const corpus::CanonicalRecord& record,
                               const std::vector<corpus::QaAnnotation>& qa) {
  nlohmann::ordered_json ocr = nlohmann::ordered_json::array();
  for (const auto& t : record.ocr_tokens) {
    ocr.push_back({{"id", t.token_id},
                   {"text", t.text},
                   {"box", {t.box.x_min, t.box.y_min, t.box.x_max, t.box.y_max}}});
  }
  std::string prompt(kBoxLocatorPrompt);
  const std::string qa_slot = "{Question_Answering}";
  prompt.replace(prompt.find(qa_slot), qa_slot.size(), corpus::format_qa_list(qa));
  const std::string ocr_slot = "{OCR_Text}";
  prompt.replace(prompt.find(ocr_slot), ocr_slot.size(),
                 ocr.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace));
  return prompt;
}

LocatorResult locate_box_llm(const corpus::CanonicalRecord& record, const corpus::QaAnnotation& qa,
                             const std::vector<TokenRun>& candidates, ChatEndpoint& endpoint,
                             const std::filesystem::path& image_root) {
  LocatorResult r;
  r.tier = Locator::llm;
  r.candidates = candidates;
  const std::filesystem::path image = image_root / record.image_path;
  const std::string response =
      endpoint.complete(box_locator_prompt(record, {qa}), std::span<const std::filesystem::path>(&image, 1));

  static const std::regex kFound(R"(Found\s*\[([^\]]*)\])", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(response, m, kFound)) {
    static const std::regex kNotFound(R"(Not\s+Found)", std::regex::icase);
    if (!std::regex_search(response, kNotFound)) {
      r.warning = qa.qa_id + ": unparseable locator response";
      spdlog::warn("{}", r.warning);
    }
    return r;
  }

  std::set<int> ids;
  static const std::regex kId(R"(\s*(\d{1,9})\s*)");
  const std::string list = m[1].str();
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    if (comma == std::string::npos) comma = list.size();
    const std::string item = list.substr(start, comma - start);
    std::smatch im;
    if (!std::regex_match(item, im, kId)) {
      r.warning = qa.qa_id + ": unparseable box id '" + item + "'";
      spdlog::warn("{}", r.warning);
      return r;
    }
    const int id = std::stoi(im[1].str());
    if (id >= static_cast<int>(record.ocr_tokens.size())) {
      r.warning = qa.qa_id + ": box id " + std::to_string(id) + " does not exist";
      spdlog::warn("{}", r.warning);
      return r;
    }
    ids.insert(id);
    start = comma + 1;
  }

  const TokenRun run = make_run(record, std::vector<int>(ids.begin(), ids.end()));
  const std::string target = metrics::normalize(qa.answer);
  if (target.empty() || metrics::normalize(run.text).find(target) == std::string::npos) {
    r.warning = qa.qa_id + ": located boxes do not contain the answer";
    spdlog::warn("{}", r.warning);
    return r;
  }
  r.confidence = Confidence::unique;
  r.token_ids = run.token_ids;
  r.merged_box = run.box;
  r.merged_text = run.text;
  return r;
}

}  // namespace cpc::pairgen
