#include <algorithm>
#include <array>
#include <set>

#include "cpc/corpus.hpp"

namespace cpc::corpus {
namespace {

constexpr std::array<std::string_view, 6> kDatasetNames = {"docvqa", "dude", "deepform", "funsd", "chartqa", "custom"};
constexpr std::array<std::string_view, 2> kSplitNames = {"train", "test"};

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c == ' ' || (c >= 0x09 && c <= 0x0d); });
}

std::string describe(const BoundingBox& b) {
  return "[" + std::to_string(b.x_min) + "," + std::to_string(b.y_min) + "," + std::to_string(b.x_max) + "," +
         std::to_string(b.y_max) + "]";
}

}  // namespace

BoundingBox union_of(const BoundingBox& a, const BoundingBox& b) {
  return {std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min), std::max(a.x_max, b.x_max),
          std::max(a.y_max, b.y_max)};
}

std::string_view to_string(Dataset d) { return kDatasetNames[static_cast<std::size_t>(d)]; }
std::string_view to_string(Split s) { return kSplitNames[static_cast<std::size_t>(s)]; }

std::optional<Dataset> dataset_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kDatasetNames.size(); ++i) {
    if (kDatasetNames[i] == s) return static_cast<Dataset>(i);
  }
  return std::nullopt;
}

std::optional<Split> split_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
    if (kSplitNames[i] == s) return static_cast<Split>(i);
  }
  return std::nullopt;
}

std::optional<std::string> validate(const CanonicalRecord& r) {
  if (r.record_id.empty()) return "record_id is empty";
  if (r.image_path.empty()) return "image_path is empty";
  if (r.image_width <= 0 || r.image_height <= 0) return "image dimensions must be positive";
  for (std::size_t i = 0; i < r.ocr_tokens.size(); ++i) {
    const auto& t = r.ocr_tokens[i];
    if (t.token_id != static_cast<int>(i)) {
      return "token_id " + std::to_string(t.token_id) + " at position " + std::to_string(i) + " (ids must be 0..n-1)";
    }
    if (blank(t.text)) return "token " + std::to_string(i) + " has empty text";
    if (!t.box.well_formed()) return "token " + std::to_string(i) + " box " + describe(t.box) + " is not well formed";
    if (!t.box.within(r.image_width, r.image_height)) {
      return "token " + std::to_string(i) + " box " + describe(t.box) + " exceeds the image";
    }
  }
  std::set<std::string_view> ids;
  for (const auto& qa : r.qa) {
    if (qa.qa_id.empty()) return "qa_id is empty";
    if (!ids.insert(qa.qa_id).second) return "duplicate qa_id " + qa.qa_id;
    if (blank(qa.question)) return "qa " + qa.qa_id + " has an empty question";
    if (blank(qa.answer)) return "qa " + qa.qa_id + " has an empty answer";
    if (qa.page_index < 0) return "qa " + qa.qa_id + " has a negative page_index";
  }
  return std::nullopt;
}

}  // namespace cpc::corpus

namespace cpc::corpus {

std::string format_qa_list(const std::vector<QaAnnotation>& qa) {
  std::string out;
  for (std::size_t i = 0; i < qa.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += "Q" + std::to_string(i + 1) + ": Question: " + qa[i].question + " Answer: " + qa[i].answer;
  }
  return out;
}

void rebase_image_paths(std::vector<CanonicalRecord>& records, const std::filesystem::path& from_dir,
                        const std::filesystem::path& to_dir) {
  const auto to_abs = std::filesystem::absolute(to_dir).lexically_normal();
  for (auto& r : records) {
    const std::filesystem::path p(r.image_path);
    if (p.is_absolute()) continue;
    const auto abs = std::filesystem::absolute(from_dir / p).lexically_normal();
    r.image_path = abs.lexically_relative(to_abs).generic_string();
  }
}

}  // namespace cpc::corpus
