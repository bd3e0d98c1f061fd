#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

#include "mmzero/answer.hpp"
#include "mmzero/diversity.hpp"
#include "mmzero/grpo.hpp"
#include "mmzero/render.hpp"

using namespace mmzero;

namespace {

std::vector<std::string> captions(std::size_t n) {
  static const char* words[] = {"bar", "chart", "line", "sales", "quarter", "pie", "share", "region",
                                "triangle", "angle", "circle", "radius", "table", "revenue", "growth"};
  std::mt19937 rng(5);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = "A";
    for (int w = 0; w < 24; ++w) s += std::string(" ") + words[rng() % 15];
    out.push_back(std::move(s));
  }
  return out;
}

std::string golden(const char* name) {
  std::ifstream in(std::string(MMZERO_GOLDEN_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

static void BM_Bleu(benchmark::State& state) {
  const auto t = captions(2);
  for (auto _ : state) benchmark::DoNotOptimize(bleu(t[0], t[1]));
}
BENCHMARK(BM_Bleu);

static void BM_DistanceAndCluster(benchmark::State& state) {
  const auto t = captions(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto d = distance_matrix(t);
    benchmark::DoNotOptimize(agglomerate(d, 0.7));
  }
}
BENCHMARK(BM_DistanceAndCluster)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_GroupAdvantages(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1.5);
  std::vector<double> r(static_cast<std::size_t>(state.range(0)));
  for (auto& x : r) x = u(rng);
  const GrpoConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(group_advantages(r, cfg));
}
BENCHMARK(BM_GroupAdvantages)->Arg(4)->Arg(16);

static void BM_MajorityVote(benchmark::State& state) {
  std::vector<Vote> votes;
  for (const char* a : {"14", "14.0", "A", "a.", "12", "14"}) votes.push_back(normalize(a));
  for (auto _ : state) benchmark::DoNotOptimize(majority_vote(votes));
}
BENCHMARK(BM_MajorityVote);

static void BM_RenderChart(benchmark::State& state) {
  const SvgSource src{golden("bar_chart.svg"), "bench"};
  const RenderLimits limits;
  for (auto _ : state) benchmark::DoNotOptimize(render_svg(src, limits));
}
BENCHMARK(BM_RenderChart)->Unit(benchmark::kMillisecond);

static void BM_RenderBatch(benchmark::State& state) {
  std::vector<SvgSource> batch;
  for (const char* f : {"bar_chart.svg", "line_chart.svg", "pie_chart.svg", "triangle.svg"}) {
    for (int i = 0; i < 4; ++i) batch.push_back({golden(f), f});
  }
  RenderLimits limits;
  limits.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(render_batch(batch, limits));
}
BENCHMARK(BM_RenderBatch)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
