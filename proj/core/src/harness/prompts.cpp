#include <nlohmann/json.hpp>

#include <fstream>

#include "cpc/error.hpp"
#include "cpc/harness.hpp"

namespace cpc::harness {
namespace {

constexpr std::string_view kDocumentPrompt =
    "You are asked to answer questions asked on a document image.\n"
    "The answers to questions are short text spans taken verbatim from the document.\n"
    "This means that the answers comprise a set of contiguous text tokens present in the document.\n"
    "\n"
    "Question: {Question}\n"
    "\n"
    "Directly extract the answer of the question from the document with as few words as possible.\n"
    "\n"
    "Answer:";

constexpr std::string_view kDeepFormPrompt =
    "You are now working on DeepForm, a dataset for extracting text from visually structured political ad "
    "receipts. This dataset focuses on five key fields:\n"
    "\n"
    "1. **contract_num**: Contract number (multiple documents can share the same number if a contract is "
    "revised)\n"
    "2. **advertiser**: Advertiser name (often a political committee, but not always)\n"
    "3. **flight_from / flight_to**: Start and end air dates for the ad (also known as \"flight dates\")\n"
    "4. **gross_amount**: Total amount paid for the ads\n"
    "\n"
    "The answer always appears in the document, but it may not match the exact words of the question or field "
    "name. Provide a contiguous text span from the form, and include no additional explanation besides the "
    "answer.\n"
    "\n"
    "Question: {Question}\n"
    "\n"
    "Answer:";

constexpr std::string_view kFunsdPrompt =
    "You are now working on FUNSD, a dataset for form understanding in scanned documents. These documents "
    "often contain text arranged in various sections, tables, or multi-line blocks, and your goal is to extract "
    "the text that directly answers each question. Your task is to return the contiguous text snippet from the "
    "document that fully answers each question. The answer is guaranteed to be present in the form image, so "
    "do not refuse. If the relevant text spans multiple lines or rows in a table, ensure you include all of "
    "them exactly as they appear. Avoid adding explanations or summarizing the text; simply return a contiguous "
    "text snippet from the form that best addresses the question.\n"
    "\n"
    "Question: {Question}\n"
    "\n"
    "Answer:";

constexpr std::string_view kChartQaPrompt =
    "You are analyzing a chart that may include numeric data, textual labels, and visual features (e.g., bars, "
    "lines, colors). Below are some example questions and answers from other charts—these examples are not "
    "from this chart. When answering the current question, rely solely on the information in the chart you are "
    "analyzing, and provide a concise answer based strictly on the chart’s data. Avoid outside knowledge or "
    "extra explanations.\n"
    "\n"
    "Additionally, the question is guaranteed to have an answer found in the chart. For numeric answers, remove "
    "any commas or symbols (e.g., “%”) unless specifically asked for. For instance, “37,133” "
    "should be written as “37133” and “32.4%” should be written as “32.4.”\n"
    "\n"
    "Question: {Question}\n"
    "\n"
    "Answer:";

std::string substitute(std::string_view tmpl, std::string_view question) {
  std::string out(tmpl);
  const std::string slot = "{Question}";
  out.replace(out.find(slot), slot.size(), question);
  return out;
}

}  // namespace

const std::string_view kRegionOcrPrompt =
    "Analyze the provided image, which has a **single red box** containing text. **Extract only** the text "
    "inside this box, preserving the **original line order** from **top** to **bottom**. If there are multiple "
    "lines, output them **separately**; if there's just one line, output it **as is**. **Do not** include any "
    "text or descriptions from outside the red box, and **do not** add any extra punctuation, commentary, or "
    "code block markers. Return **only** the exact text inside the red box.";

std::string_view to_string(Task t) { return t == Task::cognitive ? "cognitive" : "perceptual"; }

std::string_view to_string(Profile p) { return p == Profile::closed ? "closed" : "sft"; }

std::optional<Profile> profile_from_string(std::string_view s) {
  if (s == "closed") return Profile::closed;
  if (s == "sft") return Profile::sft;
  return std::nullopt;
}

std::string prompt_for(corpus::Dataset dataset, Task task, std::string_view question, Profile profile) {
  if (task == Task::perceptual) {
    return profile == Profile::sft ? std::string(pairgen::kPerceptualQuestion) : std::string(kRegionOcrPrompt);
  }
  if (profile == Profile::sft) return std::string(question);
  switch (dataset) {
    case corpus::Dataset::docvqa:
    case corpus::Dataset::dude: return substitute(kDocumentPrompt, question);
    case corpus::Dataset::deepform: return substitute(kDeepFormPrompt, question);
    case corpus::Dataset::funsd: return substitute(kFunsdPrompt, question);
    case corpus::Dataset::chartqa: return substitute(kChartQaPrompt, question);
    case corpus::Dataset::custom: break;
  }
  throw UnknownDataset(std::string(corpus::to_string(dataset)));
}

std::string trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

void AnswerExtractor::set(corpus::Dataset dataset, const std::string& pattern) {
  try {
    rules_.insert_or_assign(dataset, std::regex(pattern, std::regex::ECMAScript));
  } catch (const std::regex_error& e) {
    throw std::invalid_argument("bad pattern for " + std::string(corpus::to_string(dataset)) + ": " + e.what());
  }
}

std::string AnswerExtractor::apply(corpus::Dataset dataset, std::string response) const {
  const auto it = rules_.find(dataset);
  if (it == rules_.end()) return response;
  std::smatch m;
  if (!std::regex_search(response, m, it->second)) return response;
  const auto& g = m.size() > 1 && m[1].matched ? m[1] : m[0];
  return trim(g.str());
}

AnswerExtractor AnswerExtractor::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument(path.string() + ": expected an object");
  AnswerExtractor ex;
  for (const auto& [name, pattern] : j.items()) {
    const auto d = corpus::dataset_from_string(name);
    if (!d) throw std::invalid_argument(path.string() + ": unknown dataset '" + name + "'");
    if (!pattern.is_string()) throw std::invalid_argument(path.string() + ": pattern must be a string");
    ex.set(*d, pattern.get<std::string>());
  }
  return ex;
}

}  // namespace cpc::harness
