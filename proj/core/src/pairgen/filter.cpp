#include <regex>

#include "cpc/endpoint.hpp"
#include "cpc/metrics.hpp"
#include "cpc/pairgen.hpp"

namespace cpc::pairgen {
namespace {

constexpr std::string_view kExtractiveFilterPrompt =
    "You are tasked with determining whether the provided question-answer pairs are examples of extractive "
    "question answering (Extractive QA).\n"
    "\n"
    "**You have been provided with the following:**\n"
    "1. The document image.\n"
    "2. A list of question-answer pairs.\n"
    "\n"
    "**Here are the questions and answers:**\n"
    "{Question_Answering}\n"
    "\n"
    "**Definition of Extractive QA**\n"
    "In the domain of document understanding, Extractive Question Answering (Extractive QA) refers to systems "
    "that analyze and comprehend both the visual and textual information within a document to directly extract "
    "answers to user queries from the document's existing content. The answers are typically located in "
    "specific sections of the document, eliminating the need for complex reasoning or the generation of new "
    "content. Extractive QA emphasizes precise localization and extraction of information to ensure the "
    "accuracy and verifiability of the answers.\n"
    "\n"
    "**Non-Extractive QA Question Types:**\n"
    "1. **Counting Questions:** These require the system to count specific elements or occurrences within the "
    "document, such as \"How many times is the term 'machine learning' mentioned in the report?\"\n"
    "2. **Comparing Questions:** These involve evaluating and contrasting different pieces of information "
    "within the document, such as \"Which department had a higher budget allocation in Q2, Marketing or "
    "Sales?\"\n"
    "3. **Causal Reasoning:** These questions require understanding cause-effect relationships within the "
    "document, such as \"What caused the increase in operational costs?\"\n"
    "4. **Synthesis Questions:** These require summarizing or aggregating information from the document, such "
    "as \"Summarize the key findings of the annual report.\"\n"
    "5. **Inference Questions:** These ask for conclusions based on implicit information within the document, "
    "such as \"What can be inferred about the company's market strategy from the sales data?\"\n"
    "\n"
    "**Your Task**\n"
    "For each question in the list, determine whether it is an example of extractive QA based on the "
    "definition provided.\n"
    "\n"
    "**Important:**\n"
    "- **Do not include any explanatory content in your response.**\n"
    "- **Respond in the following format for each question:**\n"
    "- If the question is extractive QA, respond with: \"Yes\".\n"
    "- If the question is not extractive QA, respond with: \"No\".\n"
    "\n"
    "**Example Response:**\n"
    "Q1: Yes\n"
    "Q2: No\n"
    "Q3: Yes";

std::string joined_ocr_text(const corpus::CanonicalRecord& record) {
  std::string text;
  for (const auto& t : record.ocr_tokens) {
    if (!text.empty()) text.push_back(' ');
    text += t.text;
  }
  return metrics::normalize(text);
}

}  // namespace

std::string extractive_filter_prompt(const std::vector<corpus::QaAnnotation>& qa) {
  std::string prompt(kExtractiveFilterPrompt);
  const std::string slot = "{Question_Answering}";
  prompt.replace(prompt.find(slot), slot.size(), corpus::format_qa_list(qa));
  return prompt;
}

std::vector<QaVerdict> filter_extractive(const corpus::CanonicalRecord& record, ChatEndpoint* endpoint,
                                         const std::filesystem::path& image_root) {
  std::vector<QaVerdict> out;
  for (const auto& q : record.qa) out.push_back({q.qa_id, false});
  if (record.qa.empty()) return out;

  if (endpoint == nullptr) {
    const std::string text = joined_ocr_text(record);
    for (std::size_t i = 0; i < record.qa.size(); ++i) {
      const std::string answer = metrics::normalize(record.qa[i].answer);
      out[i].keep = !answer.empty() && text.find(answer) != std::string::npos;
    }
    return out;
  }

  const std::filesystem::path image = image_root / record.image_path;
  const std::string response =
      endpoint->complete(extractive_filter_prompt(record.qa), std::span<const std::filesystem::path>(&image, 1));
  static const std::regex kVerdict(R"(Q\s*(\d+)\s*:\s*\**\s*(yes|no)\b)", std::regex::icase);
  std::vector<bool> seen(out.size(), false);
  for (auto it = std::sregex_iterator(response.begin(), response.end(), kVerdict); it != std::sregex_iterator();
       ++it) {
    if ((*it)[1].length() > 9) continue;
    const auto n = std::stoul((*it)[1].str());
    if (n == 0 || n > out.size() || seen[n - 1]) continue;
    seen[n - 1] = true;
    const char c = (*it)[2].str().front();
    out[n - 1].keep = c == 'y' || c == 'Y';
  }
  return out;
}

}  // namespace cpc::pairgen
