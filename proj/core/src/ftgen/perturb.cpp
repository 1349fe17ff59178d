#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <random>
#include <set>

#include "cpc/endpoint.hpp"
#include "cpc/error.hpp"
#include "cpc/ftgen.hpp"
#include "cpc/metrics.hpp"

namespace cpc::ftgen {
namespace {

constexpr std::string_view kPerturbationPrompt =
    "**Task Description**\n"
    "\n"
    "You are tasked with generating potential OCR (Optical Character Recognition) error results based on the "
    "provided list of question-answer (QA) pairs.\n"
    "\n"
    "**Provided Content:**\n"
    "\n"
    "**List of QA Pairs:**\n"
    "{Question_Answering}\n"
    "\n"
    "**Your Task**\n"
    "\n"
    "For each QA pair, provide **3 possible OCR error results for the answer (A)**. **Each error result must "
    "maintain a similar format, contain different content, must not be identical to the original answer (A), "
    "and must be distinct from the other error results.**\n"
    "\n"
    "**Output Format**\n"
    "\n"
    "Please respond in **JSON** format according to the structure provided below. Note that \"error1,\" "
    "\"error2,\" and \"error3\" are merely placeholders.\n";

constexpr std::string_view kOutputStructure = R"({"error1": "...", "error2": "...", "error3": "..."})";

struct Confusion {
  std::u32string_view from;
  std::u32string_view to;
};

constexpr Confusion kConfusions[] = {
    {U"l", U"I"}, {U"I", U"l"}, {U"O", U"0"}, {U"0", U"O"}, {U"rn", U"m"}, {U"m", U"rn"}, {U"1", U"l"},
    {U"l", U"1"}, {U"5", U"S"}, {U"S", U"5"}, {U"c", U"e"}, {U"e", U"c"}, {U"a", U"o"},  {U"o", U"a"},
};

std::string to_utf8(std::u32string_view s) {
  std::string out;
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

// Every single edit the confusion table, a drop or a duplicate allows, in a
// fixed order, without repeats or the original.
std::vector<std::string> candidate_edits(std::string_view answer) {
  const std::u32string s = metrics::to_scalars(answer);
  std::vector<std::string> out;
  std::set<std::string> seen{std::string(answer)};
  auto add = [&](const std::u32string& v) {
    auto utf8 = to_utf8(v);
    if (!utf8.empty() && seen.insert(utf8).second) out.push_back(std::move(utf8));
  };
  for (const auto& c : kConfusions) {
    for (std::size_t i = 0; i + c.from.size() <= s.size(); ++i) {
      if (std::u32string_view(s).substr(i, c.from.size()) != c.from) continue;
      std::u32string v = s;
      v.replace(i, c.from.size(), c.to);
      add(v);
    }
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::u32string drop = s;
    drop.erase(i, 1);
    add(drop);
    std::u32string dup = s;
    dup.insert(i, 1, s[i]);
    add(dup);
  }
  return out;
}

const nlohmann::json* find_error_object(const nlohmann::json& j) {
  if (!j.is_object()) return nullptr;
  if (j.contains("error1") || j.contains("error2") || j.contains("error3")) return &j;
  for (const auto& [k, v] : j.items()) {
    if (const auto* inner = find_error_object(v)) return inner;
  }
  return nullptr;
}

std::vector<std::string> parse_suggestions(const std::string& response, std::vector<std::string>& warnings) {
  const auto open = response.find('{');
  const auto close = response.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    warnings.push_back("perturbation response holds no JSON object");
    return {};
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(response.substr(open, close - open + 1));
  } catch (const nlohmann::json::exception& e) {
    warnings.push_back(std::string("perturbation response is not JSON: ") + e.what());
    return {};
  }
  const nlohmann::json* obj = find_error_object(j);
  if (!obj) {
    warnings.push_back("perturbation response has no error1..error3 keys");
    return {};
  }
  std::vector<std::string> out;
  for (const char* key : {"error1", "error2", "error3"}) {
    out.push_back(obj->contains(key) && obj->at(key).is_string() ? obj->at(key).get<std::string>() : "");
  }
  return out;
}

}  // namespace

std::string perturbation_prompt(std::string_view question, std::string_view answer) {
  std::string prompt(kPerturbationPrompt);
  const std::string slot = "{Question_Answering}";
  prompt.replace(prompt.find(slot), slot.size(),
                 corpus::format_qa_list({{"", std::string(question), std::string(answer), 0}}));
  prompt.append(kOutputStructure);
  return prompt;
}

std::array<std::string, 3> local_perturbations(std::string_view answer, std::uint64_t seed) {
  if (answer.empty()) throw EmptyAnswer();
  auto pool = candidate_edits(answer);
  // Seeded Fisher-Yates with raw engine output: std distributions are not
  // portable across standard libraries.
  std::mt19937_64 rng(seed);
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng() % i]);
  // Short answers may have too few edits; pad with appended marks.
  for (const char* tail : {".", "-", "1", "l"}) {
    if (pool.size() >= 3) break;
    std::string v = std::string(answer) + tail;
    if (std::find(pool.begin(), pool.end(), v) == pool.end()) pool.push_back(std::move(v));
  }
  if (pool.size() < 3) throw PerturbationImpossible(std::string(answer));
  return {pool[0], pool[1], pool[2]};
}

Perturbation perturb_answer(std::string_view answer, std::uint64_t seed, ChatEndpoint* endpoint,
                            std::string_view question) {
  if (answer.empty()) throw EmptyAnswer();
  Perturbation p;
  const auto local = local_perturbations(answer, seed);
  if (endpoint == nullptr) {
    p.variants = local;
    p.fallback_used = 3;
    return p;
  }

  const auto suggestions = parse_suggestions(endpoint->complete(perturbation_prompt(question, answer), {}),
                                             p.warnings);
  std::vector<std::string> accepted;
  for (const auto& s : suggestions) {
    const bool ok = s.find_first_not_of(" \t\r\n") != std::string::npos && s != answer &&
                    std::find(accepted.begin(), accepted.end(), s) == accepted.end();
    if (ok) {
      accepted.push_back(s);
    } else {
      p.warnings.push_back("rejected suggestion '" + s + "'");
    }
  }
  for (const auto& l : local) {
    if (accepted.size() >= 3) break;
    if (std::find(accepted.begin(), accepted.end(), l) != accepted.end()) continue;
    accepted.push_back(l);
    ++p.fallback_used;
  }
  // All three local variants may collide with accepted suggestions.
  for (const auto& extra : candidate_edits(answer)) {
    if (accepted.size() >= 3) break;
    if (std::find(accepted.begin(), accepted.end(), extra) != accepted.end()) continue;
    accepted.push_back(extra);
    ++p.fallback_used;
  }
  if (accepted.size() < 3) throw PerturbationImpossible(std::string(answer));
  for (std::size_t i = 0; i < 3; ++i) p.variants[i] = accepted[i];
  for (const auto& w : p.warnings) spdlog::warn("perturbation: {}", w);
  return p;
}

}  // namespace cpc::ftgen
