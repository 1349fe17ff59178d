#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "cpc/error.hpp"

namespace cpc::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::random_device rd;
  for (int i = 0; i < 32; ++i) {
    path_ = fs::temp_directory_path() / ("cpc-test-" + std::to_string(rd()) + std::to_string(rd()));
    if (fs::create_directories(path_)) return;
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

RgbImage page_image(int width, int height, const std::vector<TokenSpec>& tokens) {
  RgbImage img(width, height, 255);
  for (const auto& t : tokens) {
    std::uint32_t h = 2166136261u;
    for (char c : t.text) h = (h ^ static_cast<std::uint8_t>(c)) * 16777619u;
    for (int y = t.box.y_min; y < t.box.y_max; ++y) {
      for (int x = t.box.x_min; x < t.box.x_max; ++x) {
        const auto v = static_cast<std::uint8_t>(40 + ((h >> ((x + y) % 24)) & 0x7F));
        auto* p = img.at(x, y);
        p[0] = v;
        p[1] = static_cast<std::uint8_t>(v / 2);
        p[2] = static_cast<std::uint8_t>(255 - v);
      }
    }
  }
  return img;
}

corpus::CanonicalRecord make_record(const fs::path& dir, const std::string& record_id, corpus::Dataset dataset,
                                    corpus::Split split, int width, int height,
                                    const std::vector<TokenSpec>& tokens,
                                    const std::vector<corpus::QaAnnotation>& qa) {
  fs::create_directories(dir / "images");
  const std::string rel = "images/" + record_id + ".png";
  write_png(dir / rel, page_image(width, height, tokens));
  corpus::CanonicalRecord r;
  r.record_id = record_id;
  r.dataset = dataset;
  r.split = split;
  r.image_path = rel;
  r.image_width = width;
  r.image_height = height;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    r.ocr_tokens.push_back({static_cast<int>(i), tokens[i].text, tokens[i].box});
  }
  r.qa = qa;
  return r;
}

std::vector<TokenSpec> layout_words(const std::vector<std::string>& words, int width) {
  std::vector<TokenSpec> out;
  int x = 4, y = 4;
  for (const auto& w : words) {
    const int len = 6 * static_cast<int>(w.size()) + 2;
    if (x + len > width - 4) {
      x = 4;
      y += 16;
    }
    out.push_back({w, {x, y, x + len, y + 10}});
    x += len + 6;
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string item_answer(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "Item-%02d", i);
  return buf;
}

EvalFixture make_eval_fixture(const fs::path& dir, int n, corpus::Split split, const corpus::Dataset* dataset) {
  static constexpr corpus::Dataset kCycle[] = {corpus::Dataset::docvqa, corpus::Dataset::dude,
                                               corpus::Dataset::deepform, corpus::Dataset::funsd,
                                               corpus::Dataset::chartqa};
  EvalFixture f;
  for (int i = 0; i < n; ++i) {
    const auto ds = dataset ? *dataset : kCycle[i % 5];
    char id[16];
    std::snprintf(id, sizeof id, "rec%03d", i);
    auto tokens = layout_words({"Total", "amount", item_answer(i), "signed", "by", "clerk"}, 160);
    f.records.push_back(make_record(dir, id, ds, split, 160, 60, tokens,
                                    {{"q" + std::to_string(i), "What is the item code " + std::to_string(i) + "?",
                                      item_answer(i), 0}}));
  }
  f.canonical = dir / "records.jsonl";
  corpus::emit_canonical(f.records, f.canonical);
  f.pair_dir = dir / "pairs";
  pairgen::BuildOptions opts;
  opts.image_root = dir;
  f.pairs = pairgen::build_eval_pairs(f.records, nullptr, f.pair_dir, opts).pairs;
  return f;
}

}  // namespace cpc::testing
