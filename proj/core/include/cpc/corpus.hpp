#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cpc {
class ChatEndpoint;
}

namespace cpc::corpus {

// Pixel coordinates, origin top-left. Edges are half-open: the box covers
// columns [x_min, x_max) and rows [y_min, y_max).
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  bool operator==(const BoundingBox&) const = default;

  bool well_formed() const { return x_min >= 0 && y_min >= 0 && x_min < x_max && y_min < y_max; }
  bool within(int width, int height) const { return well_formed() && x_max <= width && y_max <= height; }
  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
};

BoundingBox union_of(const BoundingBox& a, const BoundingBox& b);

struct OcrToken {
  int token_id = 0;
  std::string text;
  BoundingBox box;

  bool operator==(const OcrToken&) const = default;
};

struct QaAnnotation {
  std::string qa_id;
  std::string question;
  std::string answer;
  int page_index = 0;

  bool operator==(const QaAnnotation&) const = default;
};

enum class Dataset { docvqa, dude, deepform, funsd, chartqa, custom };
enum class Split { train, test };

std::string_view to_string(Dataset d);
std::string_view to_string(Split s);
std::optional<Dataset> dataset_from_string(std::string_view s);
std::optional<Split> split_from_string(std::string_view s);

// One page image with its OCR tokens and QA annotations.
struct CanonicalRecord {
  std::string record_id;
  Dataset dataset = Dataset::custom;
  Split split = Split::test;
  std::string image_path;  // relative to the canonical file's directory
  int image_width = 0;
  int image_height = 0;
  std::vector<OcrToken> ocr_tokens;
  std::vector<QaAnnotation> qa;

  bool operator==(const CanonicalRecord&) const = default;
};

// Empty when the record satisfies every type invariant, else the first violation.
std::optional<std::string> validate(const CanonicalRecord& record);

// "Q1: Question: ... Answer: ..." lines, numbered from 1, as the
// annotation-assisting prompts expect.
std::string format_qa_list(const std::vector<QaAnnotation>& qa);

struct ParseOptions {
  // Resolve and stat every image_path against the file's directory.
  bool check_images = true;
};

// Throws MalformedRecord (1-based line) or MissingImage. The whole file is
// rejected on the first bad line.
std::vector<CanonicalRecord> parse_canonical(const std::filesystem::path& path,
                                             const ParseOptions& options = {});
std::vector<CanonicalRecord> parse_canonical_text(std::string_view text);

// One JSON object per line, fixed key order. Throws MalformedRecord for
// records that violate invariants (line = position + 1), IoFailure on write errors.
void emit_canonical(const std::vector<CanonicalRecord>& records, const std::filesystem::path& path);
std::string to_canonical_line(const CanonicalRecord& record);

// Rewrites relative image paths so they resolve from `to_dir` instead of `from_dir`.
void rebase_image_paths(std::vector<CanonicalRecord>& records, const std::filesystem::path& from_dir,
                        const std::filesystem::path& to_dir);

struct AdapterDescriptor {
  std::string adapter;  // docvqa | dude | deepform | funsd | chartqa | custom
  std::filesystem::path source;
  Split split = Split::test;
};

struct AdaptResult {
  std::vector<CanonicalRecord> records;
  std::vector<std::string> warnings;
  std::size_t dropped_qa = 0;
  std::size_t dropped_tokens = 0;
};

// Converts a dataset source tree into canonical records. image_path values
// are relative to `descriptor.source`. The DeepForm adapter uses `endpoint`
// for page selection; without one every QA lands on page 0 with a warning.
// Throws UnknownAdapter, SourceLayoutMismatch.
AdaptResult adapt_dataset(const AdapterDescriptor& descriptor, ChatEndpoint* endpoint = nullptr);

std::vector<std::string> adapter_names();

struct PageAssignment {
  std::string qa_id;
  int page_index = 0;

  bool operator==(const PageAssignment&) const = default;
};

struct PageSelection {
  std::vector<PageAssignment> assignments;
  std::vector<std::string> warnings;
};

std::string page_selection_prompt(const std::vector<QaAnnotation>& qa);

// Maps every QA of a multi-page document to one page. Pages must be given in
// page order; each page image is sent with its index (0-based) stamped in the
// top-left corner, and the answer number is taken as that index. Images are
// resolved against `image_root`. Single-page documents and a null endpoint
// never call out; unparseable answers fall back to page 0 with a warning.
// EndpointFailure propagates.
PageSelection select_deepform_page(const std::vector<CanonicalRecord>& doc_pages,
                                   const std::vector<QaAnnotation>& qa, ChatEndpoint* endpoint,
                                   const std::filesystem::path& image_root = {});

}  // namespace cpc::corpus
