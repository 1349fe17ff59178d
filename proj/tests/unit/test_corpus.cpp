#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <random>

#include "cpc/corpus.hpp"
#include "cpc/error.hpp"
#include "cpc/image.hpp"
#include "fixtures.hpp"
#include "scripted_endpoint.hpp"

namespace fs = std::filesystem;
using namespace cpc::corpus;
using cpc::testing::ScriptedEndpoint;
using cpc::testing::TempDir;
using nlohmann::json;

namespace {

CanonicalRecord random_record(std::mt19937_64& rng, int index) {
  static const std::vector<std::string> words = {"Doral", "Total", "\xC3\x89t\xC3\xA9", "2020", "a\"b", "x\\y",
                                                 "\xE6\x9D\xB1\xE4\xBA\xAC", "$1,250.00", "<tag>"};
  CanonicalRecord r;
  r.record_id = "rec-" + std::to_string(index);
  r.dataset = static_cast<Dataset>(rng() % 6);
  r.split = rng() % 2 ? Split::train : Split::test;
  r.image_path = "images/" + std::to_string(rng() % 1000) + ".png";
  r.image_width = 50 + static_cast<int>(rng() % 2000);
  r.image_height = 50 + static_cast<int>(rng() % 2000);
  for (int t = static_cast<int>(rng() % 12); t > 0; --t) {
    const int x = static_cast<int>(rng() % (r.image_width - 10));
    const int y = static_cast<int>(rng() % (r.image_height - 10));
    r.ocr_tokens.push_back({static_cast<int>(r.ocr_tokens.size()), words[rng() % words.size()],
                            {x, y, x + 1 + static_cast<int>(rng() % 9), y + 1 + static_cast<int>(rng() % 9)}});
  }
  for (int q = static_cast<int>(rng() % 4); q > 0; --q) {
    r.qa.push_back({r.record_id + ":q" + std::to_string(r.qa.size()), "What is " + words[rng() % words.size()] + "?",
                    words[rng() % words.size()], static_cast<int>(rng() % 3)});
  }
  return r;
}

void write_json(const fs::path& p, const json& j) { cpc::testing::write_text_file(p, j.dump()); }

void write_page(const fs::path& p, int w = 120, int h = 80) {
  fs::create_directories(p.parent_path());
  cpc::write_png(p, cpc::RgbImage(w, h));
}

// Three images, four questions; OCR in the recognitionResults shape.
fs::path docvqa_tree(const fs::path& root) {
  json data = json::array();
  int qid = 100;
  for (const std::string stem : {"ffbf0023", "ffbg0001", "ffdw0217"}) {
    write_page(root / "documents" / (stem + ".png"));
    json words = json::array(
        {{{"text", "Doral"}, {"boundingBox", {10, 10, 40, 10, 40, 20, 10, 20}}},
         {{"text", stem}, {"boundingBox", {50, 10, 90.6, 10, 90.6, 20.2, 50, 20.2}}},
         {{"text", " "}, {"boundingBox", {1, 1, 2, 1, 2, 2, 1, 2}}}});
    write_json(root / "ocr_results" / (stem + ".json"),
               {{"status", "Succeeded"}, {"recognitionResults", {{{"lines", {{{"text", "x"}, {"words", words}}}}}}}});
    data.push_back({{"questionId", qid++}, {"question", "What brand?"}, {"image", "documents/" + stem + ".png"},
                    {"answers", {"Doral", "doral"}}});
  }
  data.push_back({{"questionId", qid}, {"question", "Which code?"}, {"image", "documents/ffbf0023.png"},
                  {"answers", {"ffbf0023"}}});
  write_json(root / "test_v1.0.json", {{"dataset_split", "test"}, {"data", data}});
  return root;
}

}  // namespace

TEST(Canonical, ParsesTwoLines) {
  TempDir dir;
  cpc::write_png(dir / "a.png", cpc::RgbImage(10, 10));
  CanonicalRecord r;
  r.record_id = "r1";
  r.dataset = Dataset::docvqa;
  r.image_path = "a.png";
  r.image_width = r.image_height = 10;
  r.ocr_tokens = {{0, "Doral", {1, 1, 5, 5}}};
  r.qa = {{"q1", "Brand?", "Doral", 0}};
  auto r2 = r;
  r2.record_id = "r2";
  r2.qa[0].qa_id = "q2";
  cpc::testing::write_text_file(dir / "c.jsonl", to_canonical_line(r) + "\n" + to_canonical_line(r2) + "\n");
  const auto parsed = parse_canonical(dir / "c.jsonl");
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0], r);
  EXPECT_EQ(parsed[1], r2);
}

TEST(Canonical, KeyOrderIsFixed) {
  CanonicalRecord r;
  r.record_id = "r1";
  r.image_path = "a.png";
  r.image_width = r.image_height = 10;
  r.ocr_tokens = {{0, "x", {1, 2, 3, 4}}};
  r.qa = {{"q", "Q?", "x", 0}};
  EXPECT_EQ(to_canonical_line(r),
            R"({"record_id":"r1","dataset":"custom","split":"test","image_path":"a.png","image_width":10,)"
            R"("image_height":10,"ocr_tokens":[{"token_id":0,"text":"x","box":[1,2,3,4]}],)"
            R"("qa":[{"qa_id":"q","question":"Q?","answer":"x","page_index":0}]})");
}

TEST(Canonical, RejectsInvertedBoxWithLineNumber) {
  const std::string good =
      R"({"record_id":"r1","dataset":"docvqa","split":"test","image_path":"a.png","image_width":10,)"
      R"("image_height":10,"ocr_tokens":[],"qa":[]})";
  const std::string bad =
      R"({"record_id":"r2","dataset":"docvqa","split":"test","image_path":"a.png","image_width":10,)"
      R"("image_height":10,"ocr_tokens":[{"token_id":0,"text":"x","box":[8,1,3,4]}],"qa":[]})";
  try {
    parse_canonical_text(good + "\n" + bad + "\n");
    FAIL() << "expected MalformedRecord";
  } catch (const cpc::MalformedRecord& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Canonical, RejectsMalformedInput) {
  EXPECT_THROW(parse_canonical_text("{not json}\n"), cpc::MalformedRecord);
  EXPECT_THROW(parse_canonical_text(R"({"record_id":"r"})"), cpc::MalformedRecord);
  const std::string extra_key =
      R"({"record_id":"r1","dataset":"docvqa","split":"test","image_path":"a.png","image_width":10,)"
      R"("image_height":10,"ocr_tokens":[],"qa":[],"extra":1})";
  EXPECT_THROW(parse_canonical_text(extra_key), cpc::MalformedRecord);
  const std::string bad_dataset =
      R"({"record_id":"r1","dataset":"vqa","split":"test","image_path":"a.png","image_width":10,)"
      R"("image_height":10,"ocr_tokens":[],"qa":[]})";
  EXPECT_THROW(parse_canonical_text(bad_dataset), cpc::MalformedRecord);
}

TEST(Canonical, MissingImage) {
  TempDir dir;
  CanonicalRecord r;
  r.record_id = "r";
  r.image_path = "nope.png";
  r.image_width = r.image_height = 10;
  emit_canonical({r}, dir / "c.jsonl");
  EXPECT_THROW(parse_canonical(dir / "c.jsonl"), cpc::MissingImage);
  EXPECT_EQ(parse_canonical(dir / "c.jsonl", {.check_images = false}).size(), 1u);
}

TEST(Canonical, EmptyListGivesEmptyFile) {
  TempDir dir;
  emit_canonical({}, dir / "c.jsonl");
  EXPECT_EQ(fs::file_size(dir / "c.jsonl"), 0u);
  EXPECT_TRUE(parse_canonical(dir / "c.jsonl").empty());
}

TEST(Canonical, EmitRejectsInvalidRecord) {
  TempDir dir;
  CanonicalRecord r;
  r.record_id = "r";
  r.image_path = "a.png";
  r.image_width = r.image_height = 10;
  r.ocr_tokens = {{0, "x", {1, 1, 20, 5}}};
  EXPECT_THROW(emit_canonical({r}, dir / "c.jsonl"), cpc::MalformedRecord);
}

TEST(Canonical, RandomRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(2024);
  std::vector<CanonicalRecord> records;
  for (int i = 0; i < 100; ++i) records.push_back(random_record(rng, i));
  emit_canonical(records, dir / "c.jsonl");
  EXPECT_EQ(parse_canonical(dir / "c.jsonl", {.check_images = false}), records);
}

TEST(Canonical, RejectsDuplicateQaIdWithinSplit) {
  auto line = [](const std::string& rec, const std::string& split) {
    return R"({"record_id":")" + rec + R"(","dataset":"docvqa","split":")" + split +
           R"(","image_path":"a.png","image_width":10,"image_height":10,"ocr_tokens":[],)"
           R"("qa":[{"qa_id":"q1","question":"Q?","answer":"x","page_index":0}]})";
  };
  EXPECT_THROW(parse_canonical_text(line("r1", "test") + "\n" + line("r2", "test") + "\n"), cpc::MalformedRecord);
  EXPECT_EQ(parse_canonical_text(line("r1", "test") + "\n" + line("r2", "train") + "\n").size(), 2u);
}

TEST(Canonical, DocvqaSizedFixture) {
  TempDir dir;
  cpc::write_png(dir / "page.png", cpc::RgbImage(40, 30));
  std::vector<CanonicalRecord> records;
  for (int i = 0; i < 1268; ++i) {
    CanonicalRecord r;
    r.record_id = "doc" + std::to_string(i);
    r.dataset = Dataset::docvqa;
    r.image_path = "page.png";
    r.image_width = 40;
    r.image_height = 30;
    r.ocr_tokens = {{0, "t" + std::to_string(i), {0, 0, 10, 10}}};
    r.qa = {{"q" + std::to_string(i), "What?", "t" + std::to_string(i), 0}};
    records.push_back(r);
  }
  emit_canonical(records, dir / "docvqa.jsonl");
  const auto parsed = parse_canonical(dir / "docvqa.jsonl");
  ASSERT_EQ(parsed.size(), 1268u);
  for (const auto& r : parsed) ASSERT_EQ(r.dataset, Dataset::docvqa);
}

TEST(Canonical, RebaseImagePaths) {
  std::vector<CanonicalRecord> records(2);
  records[0].image_path = "images/a.png";
  records[1].image_path = "/abs/b.png";
  rebase_image_paths(records, "/data/src", "/data/out");
  EXPECT_EQ(records[0].image_path, "../src/images/a.png");
  EXPECT_EQ(records[1].image_path, "/abs/b.png");
}

TEST(Corpus, FormatQaList) {
  EXPECT_EQ(format_qa_list({{"a", "Who?", "Ann", 0}, {"b", "When?", "1999", 0}}),
            "Q1: Question: Who? Answer: Ann\nQ2: Question: When? Answer: 1999");
}

TEST(Adapters, DocvqaMiniatureTree) {
  TempDir dir;
  const auto root = docvqa_tree(dir.path());
  const auto result = adapt_dataset({"docvqa", root, Split::test});
  ASSERT_EQ(result.records.size(), 3u);
  EXPECT_EQ(result.dropped_tokens, 3u);  // one blank token per page
  const auto& r = result.records[0];
  EXPECT_EQ(r.record_id, "ffbf0023");
  EXPECT_EQ(r.image_path, "documents/ffbf0023.png");
  EXPECT_EQ(r.image_width, 120);
  ASSERT_EQ(r.ocr_tokens.size(), 2u);
  EXPECT_EQ(r.ocr_tokens[0], (OcrToken{0, "Doral", {10, 10, 40, 20}}));
  EXPECT_EQ(r.ocr_tokens[1].box, (BoundingBox{50, 10, 91, 21}));  // outward rounding
  ASSERT_EQ(r.qa.size(), 2u);
  EXPECT_EQ(r.qa[0], (QaAnnotation{"100", "What brand?", "Doral", 0}));
  for (const auto& rec : result.records) EXPECT_FALSE(validate(rec).has_value());
}

TEST(Adapters, Deterministic) {
  TempDir dir;
  const auto root = docvqa_tree(dir / "src");
  emit_canonical(adapt_dataset({"docvqa", root, Split::test}).records, dir / "a.jsonl");
  emit_canonical(adapt_dataset({"docvqa", root, Split::test}).records, dir / "b.jsonl");
  EXPECT_EQ(cpc::testing::read_text_file(dir / "a.jsonl"), cpc::testing::read_text_file(dir / "b.jsonl"));
}

TEST(Adapters, DudeDropsMultiPageQa) {
  TempDir dir;
  const auto root = dir.path();
  write_page(root / "images" / "docA_0.png");
  write_page(root / "images" / "docA_1.png");
  write_json(root / "ocr" / "docA_0.json", json::array({{{"text", "Acme"}, {"box", {5, 5, 30, 15}}}}));
  write_json(root / "ocr" / "docA_1.json", json::array({{{"text", "Beta"}, {"box", {5, 5, 30, 15}}}}));
  const json items = json::array({
      {{"questionId", "q1"}, {"question", "Who?"}, {"answers", {"Acme"}}, {"docId", "docA"},
       {"answers_page_bounding_boxes", {{{{"page", 0}, {"left", 1}}}}}},
      {{"questionId", "q2"}, {"question", "Both?"}, {"answers", {"Acme Beta"}}, {"docId", "docA"},
       {"answers_page_bounding_boxes", {{{{"page", 0}}, {{"page", 1}}}}}},
      {{"questionId", "q3"}, {"question", "Second?"}, {"answers", {"Beta"}}, {"docId", "docA"},
       {"answers_page_bounding_boxes", {{{{"page", 1}}}}}},
  });
  write_json(root / "test.json", items);
  const auto result = adapt_dataset({"dude", root, Split::test});
  EXPECT_EQ(result.dropped_qa, 1u);
  ASSERT_EQ(result.records.size(), 2u);
  EXPECT_EQ(result.records[0].record_id, "docA_0");
  EXPECT_EQ(result.records[1].qa.at(0), (QaAnnotation{"q3", "Second?", "Beta", 1}));
  for (const auto& r : result.records) {
    for (const auto& q : r.qa) EXPECT_NE(q.qa_id, "q2");
  }
}

TEST(Adapters, FunsdKeepsQuestionAnswerLinks) {
  TempDir dir;
  const auto base = dir / "testing_data";
  write_page(base / "images" / "form1.png", 200, 100);
  const json form = {
      {"form",
       {{{"id", 0}, {"label", "question"}, {"text", "Date:"}, {"box", {5, 5, 40, 15}},
         {"words", {{{"text", "Date:"}, {"box", {5, 5, 40, 15}}}}}, {"linking", {{0, 1}}}},
        {{"id", 1}, {"label", "answer"}, {"text", "May 5"}, {"box", {45, 5, 90, 15}},
         {"words", {{{"text", "May"}, {"box", {45, 5, 65, 15}}}, {{"text", "5"}, {"box", {70, 5, 90, 15}}}}},
         {"linking", {{0, 1}}}},
        {{"id", 2}, {"label", "header"}, {"text", "FORM"}, {"box", {5, 30, 40, 40}},
         {"words", {{{"text", "FORM"}, {"box", {5, 30, 40, 40}}}}}, {"linking", {{2, 1}}}}}}};
  write_json(base / "annotations" / "form1.json", form);
  const auto result = adapt_dataset({"funsd", dir.path(), Split::test});
  ASSERT_EQ(result.records.size(), 1u);
  const auto& r = result.records[0];
  EXPECT_EQ(r.image_path, "testing_data/images/form1.png");
  EXPECT_EQ(r.ocr_tokens.size(), 4u);
  ASSERT_EQ(r.qa.size(), 1u);
  EXPECT_EQ(r.qa[0], (QaAnnotation{"form1:0-1", "Date:", "May 5", 0}));
}

TEST(Adapters, ChartqaHumanAndAugmented) {
  TempDir dir;
  const auto base = dir / "test";
  write_page(base / "png" / "c1.png");
  write_json(base / "ocr" / "c1.json", json::array({{{"text", "32.4%"}, {"box", {5, 5, 30, 15}}}}));
  write_json(base / "test_human.json", json::array({{{"imgname", "c1.png"}, {"query", "Share?"}, {"label", "32.4"}}}));
  write_json(base / "test_augmented.json",
             json::array({{{"imgname", "c1.png"}, {"query", "Max?"}, {"label", 40}}}));
  const auto result = adapt_dataset({"chartqa", dir.path(), Split::test});
  ASSERT_EQ(result.records.size(), 1u);
  ASSERT_EQ(result.records[0].qa.size(), 2u);
  EXPECT_EQ(result.records[0].qa[1], (QaAnnotation{"augmented-0", "Max?", "40", 0}));
}

TEST(Adapters, CustomFiltersSplit) {
  TempDir dir;
  cpc::write_png(dir / "a.png", cpc::RgbImage(10, 10));
  CanonicalRecord a;
  a.record_id = "a";
  a.image_path = "a.png";
  a.image_width = a.image_height = 10;
  auto b = a;
  b.record_id = "b";
  b.split = Split::train;
  emit_canonical({a, b}, dir / "records.jsonl");
  const auto result = adapt_dataset({"custom", dir.path(), Split::train});
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0].record_id, "b");
}

TEST(Adapters, DeepformUsesPageSelection) {
  TempDir dir;
  const auto root = dir.path();
  write_page(root / "pdfs" / "d1-0.png");
  write_page(root / "pdfs" / "d1-1.png");
  write_page(root / "pdfs" / "d1-2.png");
  write_json(root / "ocr" / "d1-2.json", json::array({{{"text", "$1,250"}, {"box", {5, 5, 40, 15}}}}));
  cpc::testing::write_text_file(
      root / "test.jsonl",
      json({{"doc_id", "d1"},
            {"pages", {"pdfs/d1-0.png", "pdfs/d1-1.png", "pdfs/d1-2.png"}},
            {"fields", {{"advertiser", "Acme PAC"}, {"gross_amount", "$1,250"}}}})
              .dump() +
          "\n");
  auto endpoint = ScriptedEndpoint::sequence({"Q1:1\nQ2:2"});
  const auto result = adapt_dataset({"deepform", root, Split::test}, &endpoint);
  EXPECT_EQ(endpoint.calls(), 1);
  ASSERT_EQ(result.records.size(), 2u);
  EXPECT_EQ(result.records[0].record_id, "d1_p1");
  EXPECT_EQ(result.records[0].qa.at(0).question, "What is the value for the 'advertiser'?");
  EXPECT_EQ(result.records[1].record_id, "d1_p2");
  EXPECT_EQ(result.records[1].qa.at(0), (QaAnnotation{"d1:gross_amount", "What is the value for the 'gross_amount'?",
                                                     "$1,250", 2}));
}

TEST(Adapters, UnknownAdapter) {
  TempDir dir;
  EXPECT_THROW(adapt_dataset({"textvqa", dir.path(), Split::test}), cpc::UnknownAdapter);
}

TEST(Adapters, LayoutMismatch) {
  TempDir dir;
  EXPECT_THROW(adapt_dataset({"docvqa", dir.path(), Split::test}), cpc::SourceLayoutMismatch);
  EXPECT_THROW(adapt_dataset({"docvqa", dir / "missing", Split::test}), cpc::SourceLayoutMismatch);
  cpc::testing::write_text_file(dir / "test_v1.0.json", "{\"data\": [{\"questionId\": 1}]}");
  EXPECT_THROW(adapt_dataset({"docvqa", dir.path(), Split::test}), cpc::SourceLayoutMismatch);
  cpc::testing::write_text_file(dir / "test_v1.0.json", "[1, 2");
  EXPECT_THROW(adapt_dataset({"docvqa", dir.path(), Split::test}), cpc::SourceLayoutMismatch);
}

TEST(Adapters, Names) {
  EXPECT_EQ(adapter_names(), (std::vector<std::string>{"chartqa", "custom", "deepform", "docvqa", "dude", "funsd"}));
}

class PageSelectionFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    for (int i = 0; i < 3; ++i) {
      CanonicalRecord r;
      r.record_id = "p" + std::to_string(i);
      r.image_path = "p" + std::to_string(i) + ".png";
      r.image_width = 300;
      r.image_height = 200;
      cpc::write_png(dir_ / r.image_path, cpc::RgbImage(300, 200, 200));
      pages_.push_back(r);
    }
  }
  TempDir dir_;
  std::vector<CanonicalRecord> pages_;
  std::vector<QaAnnotation> qa_ = {{"qa1", "Advertiser?", "Acme", 0}, {"qa2", "Gross?", "$10", 0}};
};

TEST_F(PageSelectionFixture, SinglePageNeedsNoCall) {
  auto endpoint = ScriptedEndpoint::sequence({"Q1:2"});
  const auto sel = select_deepform_page({pages_[0]}, qa_, &endpoint, dir_.path());
  EXPECT_EQ(endpoint.calls(), 0);
  EXPECT_EQ(sel.assignments, (std::vector<PageAssignment>{{"qa1", 0}, {"qa2", 0}}));
}

TEST_F(PageSelectionFixture, ParsesAnswers) {
  std::vector<int> dark_pixels;
  ScriptedEndpoint endpoint([&](std::string_view, std::span<const fs::path> images, int) {
    for (const auto& p : images) {
      const auto img = cpc::read_png(p);
      int dark = 0;
      for (int y = 0; y < 30; ++y) {
        for (int x = 0; x < 30; ++x) dark += img.at(x, y)[0] == 0;
      }
      dark_pixels.push_back(dark);
    }
    return std::string("Q1:2\nQ2:1");
  });
  const auto sel = select_deepform_page(pages_, qa_, &endpoint, dir_.path());
  EXPECT_EQ(sel.assignments, (std::vector<PageAssignment>{{"qa1", 2}, {"qa2", 1}}));
  EXPECT_TRUE(sel.warnings.empty());
  ASSERT_EQ(dark_pixels.size(), 3u);
  for (int d : dark_pixels) EXPECT_GT(d, 0);  // stamped number present
  const auto prompt = endpoint.prompts().at(0);
  EXPECT_NE(prompt.find("page number indicated in the top left corner"), std::string::npos);
  EXPECT_NE(prompt.find("Q1: Question: Advertiser? Answer: Acme\nQ2: Question: Gross? Answer: $10"),
            std::string::npos);
}

TEST_F(PageSelectionFixture, GarbageFallsBackToPageZero) {
  auto endpoint = ScriptedEndpoint::sequence({"I am not sure, maybe Q1:9"});
  const auto sel = select_deepform_page(pages_, qa_, &endpoint, dir_.path());
  EXPECT_EQ(sel.assignments, (std::vector<PageAssignment>{{"qa1", 0}, {"qa2", 0}}));
  EXPECT_EQ(sel.warnings.size(), 2u);
}

TEST_F(PageSelectionFixture, NoEndpointWarns) {
  const auto sel = select_deepform_page(pages_, qa_, nullptr, dir_.path());
  EXPECT_EQ(sel.assignments, (std::vector<PageAssignment>{{"qa1", 0}, {"qa2", 0}}));
  EXPECT_EQ(sel.warnings.size(), 1u);
}
