#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpc/corpus.hpp"
#include "cpc/image.hpp"

namespace cpc {
class ChatEndpoint;
}

namespace cpc::pairgen {

// x_P for every pair.
inline constexpr std::string_view kPerceptualQuestion = "What is the text within the red box?";

enum class Locator { exact, fuzzy, llm };
std::string_view to_string(Locator l);
std::optional<Locator> locator_from_string(std::string_view s);

struct EvalPair {
  std::string pair_id;
  std::string record_id;
  std::string cognitive_query;   // x_C
  std::string perceptual_query;  // x_P
  std::string ground_truth;      // GT
  corpus::BoundingBox box;
  std::string plain_image;  // x_I, relative to the manifest directory
  std::string boxed_image;  // x_I^B, relative to the manifest directory
  Locator locator = Locator::exact;
  corpus::Dataset dataset = corpus::Dataset::custom;
  corpus::Split split = corpus::Split::test;
  std::string box_text;  // OCR text of the located tokens, reading order

  bool operator==(const EvalPair&) const = default;
};

struct QaVerdict {
  std::string qa_id;
  bool keep = false;

  bool operator==(const QaVerdict&) const = default;
};

std::string extractive_filter_prompt(const std::vector<corpus::QaAnnotation>& qa);

// Keep/drop per QA. With an endpoint the extractive-QA prompt is asked once per
// record (unanswered questions are dropped); without one a QA is kept iff its
// normalized answer occurs in the normalized, space-joined OCR text.
// EndpointFailure propagates.
std::vector<QaVerdict> filter_extractive(const corpus::CanonicalRecord& record,
                                         ChatEndpoint* endpoint,
                                         const std::filesystem::path& image_root = {});

enum class Confidence { unique, ambiguous, none };
std::string_view to_string(Confidence c);

struct TokenRun {
  std::vector<int> token_ids;
  corpus::BoundingBox box;  // tight union of the token boxes
  std::string text;         // token texts joined by single spaces

  bool operator==(const TokenRun&) const = default;
};

struct LocatorResult {
  std::vector<int> token_ids;  // non-empty iff confidence == unique
  corpus::BoundingBox merged_box;
  std::string merged_text;
  Confidence confidence = Confidence::none;
  Locator tier = Locator::exact;
  std::vector<TokenRun> candidates;  // every matching run; one for unique
  std::string warning;
};

// Smallest windows of consecutive reading-order tokens whose normalized,
// space-joined text contains the normalized answer. One window is unique,
// several are ambiguous. Only when no exact window exists is the fuzzy tier
// tried: answer words matched one-to-one against consecutive tokens with
// edit distance <= 1 each.
LocatorResult locate_box(const corpus::CanonicalRecord& record, std::string_view answer);

std::string box_locator_prompt(const corpus::CanonicalRecord& record,
                               const std::vector<corpus::QaAnnotation>& qa);

// Asks the endpoint for "Found [ids]" / "Not Found". The located tokens must
// contain the answer under normalization, otherwise the result is none with a
// warning. EndpointFailure propagates.
LocatorResult locate_box_llm(const corpus::CanonicalRecord& record, const corpus::QaAnnotation& qa,
                             const std::vector<TokenRun>& candidates, ChatEndpoint& endpoint,
                             const std::filesystem::path& image_root = {});

// max(2, round(0.003 * max(width, height)))
int stroke_width(int image_width, int image_height);

struct OutlineGeometry {
  int stroke = 0;
  // Outer edge of the outline ring, half-open, clamped to the image.
  corpus::BoundingBox outer;
  // Inner edge of the ring; pixels inside stay untouched.
  corpus::BoundingBox inner;
};

// The ring leaves `stroke` pixels of padding around the box and is `stroke`
// pixels thick. Near an image edge the ring is pushed inward so all four
// sides stay visible.
OutlineGeometry outline_geometry(int image_width, int image_height, const corpus::BoundingBox& box);

void draw_outline(RgbImage& image, const corpus::BoundingBox& box);

// VisP: writes `out` as the input plus a pure red outline around `box`.
// Throws BoxOutOfBounds, ImageDecodeFailure.
std::filesystem::path render_visual_prompt(const std::filesystem::path& plain_image,
                                           const corpus::BoundingBox& box,
                                           const std::filesystem::path& out);

struct BuildOptions {
  // Directory the canonical image_path values are relative to.
  std::filesystem::path image_root;
  // Fuzzy matches break the "box text contains GT" guarantee; off by default.
  bool allow_fuzzy = false;
};

struct RecordFailure {
  std::string record_id;
  std::string reason;
};

struct BuildResult {
  std::vector<EvalPair> pairs;
  std::vector<RecordFailure> failures;
  std::size_t kept_qa = 0;
  std::size_t dropped_non_extractive = 0;
  std::size_t dropped_unlocated = 0;
  std::size_t images = 0;  // records contributing at least one pair
};

inline constexpr std::string_view kManifestName = "pairs.jsonl";

// Filters, locates and renders; writes boxed images under out_dir/images and
// the manifest out_dir/pairs.jsonl. Failures are collected per record.
BuildResult build_eval_pairs(const std::vector<corpus::CanonicalRecord>& records,
                             ChatEndpoint* endpoint, const std::filesystem::path& out_dir,
                             const BuildOptions& options = {});

std::string to_manifest_line(const EvalPair& pair);
EvalPair parse_manifest_line(std::string_view line);  // throws MalformedRecord (line 0)
void write_manifest(const std::vector<EvalPair>& pairs, const std::filesystem::path& path);
// Throws MalformedRecord with the 1-based line number.
std::vector<EvalPair> read_manifest(const std::filesystem::path& path);

}  // namespace cpc::pairgen
