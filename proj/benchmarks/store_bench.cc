#include <filesystem>

#include <unistd.h>

#include <benchmark/benchmark.h>

#include "fewshot/embeddings.h"

namespace {

using namespace fewshot;

void BM_LoadStore(benchmark::State& state) {
  const bool sidecar = state.range(0) != 0;
  const auto path = std::filesystem::temp_directory_path() /
                    ("fewshot_bench_" + std::to_string(::getpid()) + (sidecar ? "_s" : "_p") + ".jsonl");
  EmbeddingStore store(64);
  for (int i = 0; i < 10000; ++i) {
    std::vector<float> v(64);
    for (int d = 0; d < 64; ++d) v[static_cast<std::size_t>(d)] = 0.001f * static_cast<float>(i + d);
    store.put(TokenKey{i / 100, Role::kQuery, i % 100, 0, 0}, std::move(v));
  }
  save_store(store, path, sidecar);
  for (auto _ : state) benchmark::DoNotOptimize(load_store(path));
  std::filesystem::remove(path);
  if (sidecar) std::filesystem::remove(path.string() + ".f32");
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_LoadStore)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
