#include <random>

#include <benchmark/benchmark.h>

#include "fewshot/crf.h"
#include "fewshot/transition.h"

namespace {

using namespace fewshot;

// n tokens, 2 * slots + 1 labels, emissions from a log-softmax of noise.
CrfScore make_score(int n, int slots) {
  std::vector<std::string> names;
  for (int s = 0; s < slots; ++s) names.push_back("s" + std::to_string(s));
  const LabelSet labels(names);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  CollapsedTransitionTable table;
  for (auto& v : table.values()) v = normal(gen);
  Eigen::MatrixXd e(n, static_cast<Eigen::Index>(labels.size()));
  for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = normal(gen);
  return CrfScore{e, expand_transitions(table, labels), 1.0};
}

void BM_Viterbi(benchmark::State& state) {
  const CrfScore score = make_score(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(score));
}
BENCHMARK(BM_Viterbi)->Args({20, 5})->Args({40, 15})->Args({100, 40});

void BM_LogPartition(benchmark::State& state) {
  const CrfScore score = make_score(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(log_partition(score));
}
BENCHMARK(BM_LogPartition)->Args({20, 5})->Args({40, 15})->Args({100, 40});

void BM_ForwardBackward(benchmark::State& state) {
  const CrfScore score = make_score(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(forward_backward(score));
}
BENCHMARK(BM_ForwardBackward)->Args({20, 5})->Args({40, 15});

}  // namespace
