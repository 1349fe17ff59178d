#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cpc/corpus.hpp"
#include "cpc/image.hpp"
#include "cpc/pairgen.hpp"

namespace cpc::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

struct TokenSpec {
  std::string text;
  corpus::BoundingBox box;
};

// White page with every token box filled by a grey pattern seeded from the text.
RgbImage page_image(int width, int height, const std::vector<TokenSpec>& tokens);

// Writes dir/images/<record_id>.png and returns the matching record with
// image_path relative to `dir`.
corpus::CanonicalRecord make_record(const std::filesystem::path& dir, const std::string& record_id,
                                    corpus::Dataset dataset, corpus::Split split, int width, int height,
                                    const std::vector<TokenSpec>& tokens,
                                    const std::vector<corpus::QaAnnotation>& qa);

// Lays words out left to right, wrapping rows, 10px tall boxes.
std::vector<TokenSpec> layout_words(const std::vector<std::string>& words, int width);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// n single-QA records whose answer "Item-NN" is one unique token, plus the
// built pairs (manifest at dir/pairs/pairs.jsonl). Dataset cycles over the
// five benchmark datasets unless `dataset` is given.
struct EvalFixture {
  std::vector<corpus::CanonicalRecord> records;
  std::vector<pairgen::EvalPair> pairs;
  std::filesystem::path canonical;  // dir/records.jsonl
  std::filesystem::path pair_dir;   // dir/pairs
};
EvalFixture make_eval_fixture(const std::filesystem::path& dir, int n, corpus::Split split = corpus::Split::test,
                              const corpus::Dataset* dataset = nullptr);

std::string item_answer(int i);

}  // namespace cpc::testing
