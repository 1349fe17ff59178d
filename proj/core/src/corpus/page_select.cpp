#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <random>
#include <regex>

#include "cpc/corpus.hpp"
#include "cpc/endpoint.hpp"
#include "cpc/error.hpp"
#include "cpc/image.hpp"

namespace cpc::corpus {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kPageSelectionPrompt =
    "You are given several images with the page number indicated in the top left corner.\n"
    "You will also receive a number of independent question-answer pairs.\n"
    "For each question, your task is to identify which numbered page provide the information needed "
    "to arrive at the given answer.\n"
    "Note:\n"
    "- Please identify which page these key-value pairs are most likely to appear on.\n"
    "- Output only question-answer pair id and its corresponding number. Format: Q1:number\n"
    "{Question_Answering}";

// 5x7 digit glyphs, one byte per row, low 5 bits used (bit 4 = leftmost column).
constexpr std::array<std::array<std::uint8_t, 7>, 10> kDigits = {{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},
}};

void fill(RgbImage& img, int x0, int y0, int x1, int y1, std::uint8_t v) {
  for (int y = std::max(0, y0); y < std::min(img.height, y1); ++y) {
    for (int x = std::max(0, x0); x < std::min(img.width, x1); ++x) {
      auto* p = img.at(x, y);
      p[0] = p[1] = p[2] = v;
    }
  }
}

// Black digits on a white plate in the top-left corner.
void stamp_page_number(RgbImage& img, int number) {
  const std::string text = std::to_string(number);
  const int scale = std::max(2, std::max(img.width, img.height) / 200);
  const int margin = scale * 2;
  const int advance = 6 * scale;
  fill(img, 0, 0, margin * 2 + advance * static_cast<int>(text.size()), margin * 2 + 7 * scale, 255);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto& glyph = kDigits[static_cast<std::size_t>(text[i] - '0')];
    const int ox = margin + static_cast<int>(i) * advance;
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (glyph[static_cast<std::size_t>(row)] & (0x10 >> col)) {
          fill(img, ox + col * scale, margin + row * scale, ox + (col + 1) * scale,
               margin + (row + 1) * scale, 0);
        }
      }
    }
  }
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    for (int i = 0; i < 16; ++i) {
      path_ = fs::temp_directory_path() / ("cpc-pages-" + std::to_string(rd()));
      if (fs::create_directory(path_)) return;
    }
    throw IoFailure("cannot create a temporary directory");
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

std::string page_selection_prompt(const std::vector<QaAnnotation>& qa) {
  std::string prompt(kPageSelectionPrompt);
  const std::string slot = "{Question_Answering}";
  prompt.replace(prompt.find(slot), slot.size(), format_qa_list(qa));
  return prompt;
}

PageSelection select_deepform_page(const std::vector<CanonicalRecord>& doc_pages,
                                   const std::vector<QaAnnotation>& qa, ChatEndpoint* endpoint,
                                   const fs::path& image_root) {
  PageSelection out;
  for (const auto& q : qa) out.assignments.push_back({q.qa_id, 0});
  if (doc_pages.size() <= 1 || qa.empty()) return out;
  if (endpoint == nullptr) {
    out.warnings.push_back("no endpoint for page selection; " + std::to_string(qa.size()) +
                           " QA mapped to page 0");
    return out;
  }

  TempDir tmp;
  std::vector<fs::path> images;
  for (std::size_t i = 0; i < doc_pages.size(); ++i) {
    auto img = read_png(image_root / doc_pages[i].image_path);
    stamp_page_number(img, static_cast<int>(i));
    images.push_back(tmp.path() / ("page_" + std::to_string(i) + ".png"));
    write_png(images.back(), img);
  }

  const std::string response = endpoint->complete(page_selection_prompt(qa), images);

  static const std::regex kAnswer(R"(Q\s*(\d+)\s*:\s*(\d+))");
  std::vector<bool> seen(qa.size(), false);
  for (auto it = std::sregex_iterator(response.begin(), response.end(), kAnswer); it != std::sregex_iterator();
       ++it) {
    if ((*it)[1].length() > 9 || (*it)[2].length() > 9) continue;
    const auto q = std::stoul((*it)[1].str());
    const auto page = std::stoul((*it)[2].str());
    if (q == 0 || q > qa.size() || seen[q - 1]) continue;
    seen[q - 1] = true;
    if (page >= doc_pages.size()) {
      out.warnings.push_back(qa[q - 1].qa_id + ": page " + std::to_string(page) + " out of range; using 0");
      continue;
    }
    out.assignments[q - 1].page_index = static_cast<int>(page);
  }
  for (std::size_t i = 0; i < qa.size(); ++i) {
    if (!seen[i]) out.warnings.push_back(qa[i].qa_id + ": no page in response; using 0");
  }
  for (const auto& w : out.warnings) spdlog::warn("page selection: {}", w);
  return out;
}

}  // namespace cpc::corpus
