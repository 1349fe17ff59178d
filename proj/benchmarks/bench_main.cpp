#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cpc/corpus.hpp"
#include "cpc/hash.hpp"
#include "cpc/image.hpp"
#include "cpc/metrics.hpp"
#include "cpc/pairgen.hpp"

namespace fs = std::filesystem;

namespace {

std::string random_word(std::mt19937_64& rng, std::size_t len) {
  std::string s(len, 'a');
  for (auto& c : s) c = static_cast<char>('a' + rng() % 26);
  return s;
}

void BM_Levenshtein(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_word(rng, n), b = random_word(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(cpc::metrics::levenshtein(a, b));
}
BENCHMARK(BM_Levenshtein)->Arg(8)->Arg(32)->Arg(128);

void BM_AnlsSimilarity(benchmark::State& state) {
  const std::string a = "Total Gross Amount: $1,250.00";
  const std::string b = "total gross amount $1250.00";
  for (auto _ : state) benchmark::DoNotOptimize(cpc::metrics::anls_similarity(a, b));
}
BENCHMARK(BM_AnlsSimilarity);

void BM_LocateBox(benchmark::State& state) {
  std::mt19937_64 rng(2);
  cpc::corpus::CanonicalRecord rec;
  rec.record_id = "bench";
  rec.image_width = 2000;
  rec.image_height = 2000;
  for (int i = 0; i < state.range(0); ++i) {
    const int x = (i % 40) * 48, y = (i / 40) * 14;
    rec.ocr_tokens.push_back({i, random_word(rng, 1 + rng() % 7), {x, y, x + 40, y + 10}});
  }
  const std::size_t mid = rec.ocr_tokens.size() / 2;
  const std::string answer = rec.ocr_tokens[mid].text + " " + rec.ocr_tokens[mid + 1].text;
  for (auto _ : state) benchmark::DoNotOptimize(cpc::pairgen::locate_box(rec, answer));
}
BENCHMARK(BM_LocateBox)->Arg(200)->Arg(2000);

void BM_DrawOutline(benchmark::State& state) {
  cpc::RgbImage img(1700, 2200);
  for (auto _ : state) {
    cpc::pairgen::draw_outline(img, {300, 400, 900, 460});
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_DrawOutline);

void BM_RenderVisualPrompt(benchmark::State& state) {
  const auto dir = fs::temp_directory_path() / "cpc_bench_render";
  fs::create_directories(dir);
  cpc::RgbImage img(1000, 1300);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 31);
  cpc::write_png(dir / "plain.png", img);
  for (auto _ : state) cpc::pairgen::render_visual_prompt(dir / "plain.png", {200, 300, 600, 340}, dir / "boxed.png");
  fs::remove_all(dir);
}
BENCHMARK(BM_RenderVisualPrompt)->Unit(benchmark::kMillisecond);

void BM_Sha256(benchmark::State& state) {
  const std::string payload(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) benchmark::DoNotOptimize(cpc::sha256_hex(payload));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(1 << 10)->Arg(1 << 20);

}  // namespace
BENCHMARK_MAIN();
