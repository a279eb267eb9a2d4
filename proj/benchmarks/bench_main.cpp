#include <benchmark/benchmark.h>

#include <cmath>
#include <numeric>

#include "argn/audit.hpp"
#include "argn/discretize.hpp"
#include "argn/metrics.hpp"
#include "argn/model.hpp"
#include "argn/sampler.hpp"
#include "argn/tensor.hpp"

using namespace argn;

namespace {

EncodedTable random_table(std::size_t rows, std::size_t width, std::int32_t card, std::uint64_t seed) {
  Rng rng(seed);
  EncodedTable t;
  for (std::size_t j = 0; j < width; ++j) t.sub_columns.push_back({"c" + std::to_string(j), card, "c" + std::to_string(j)});
  t.row_count = rows;
  for (std::size_t i = 0; i < rows * width; ++i) t.data.push_back(static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(card))));
  return t;
}

RawTable random_raw(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<Cell>> data;
  for (std::size_t r = 0; r < rows; ++r)
    data.push_back({format_number(std::round(rng.normal() * 100) / 10), std::string("k") + std::to_string(rng.below(12)),
                    format_number(static_cast<double>(rng.below(90))), std::string(rng.bernoulli(0.3) ? "y" : "n")});
  auto t = make_table({"x", "cat", "age", "flag"}, std::move(data));
  t.schema = infer_schema(t);
  return t;
}

void BM_DenseForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<float> x(n), W(n * n), b(n), y(n);
  for (auto& v : W) v = static_cast<float>(rng.normal());
  for (auto& v : x) v = static_cast<float>(rng.normal());
  for (auto _ : state) {
    dense_forward<float>(x, W, b, Activation::relu, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_DenseForward)->Arg(32)->Arg(128)->Arg(512);

void BM_TrainStep(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto data = random_table(256, width, 20, 2);
  auto model = ArgnModel::create(data.sub_columns, OrderMode::any_order, 3);
  std::vector<std::size_t> rows(256);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<std::size_t> order(width);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(4);
  for (auto _ : state) {
    zero_grads(model.params());
    benchmark::DoNotOptimize(batch_loss(model, data, rows, order, 0.25, rng, true));
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_TrainStep)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  const auto data = random_table(64, 8, 20, 5);
  const auto model = ArgnModel::create(data.sub_columns, OrderMode::any_order, 6);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate(model, {.n_rows = 1000, .seed = ++seed}));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

void BM_Dcr(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto train = random_raw(n, 7), syn = random_raw(n, 8);
  for (auto _ : state) benchmark::DoNotOptimize(dcr(train, syn));
}
BENCHMARK(BM_Dcr)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Achilles(benchmark::State& state) {
  const auto table = random_raw(static_cast<std::size_t>(state.range(0)), 9);
  for (auto _ : state) benchmark::DoNotOptimize(achilles_score(table));
}
BENCHMARK(BM_Achilles)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
