// SPDX-License-Identifier: Apache-2.0
// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <numeric>

#include "hinrank/kernels.hpp"
#include "hinrank/synthgen.hpp"

using namespace hinrank;

namespace {

struct World {
  SynthData data = generate(SynthSpec{});
  HeteroGraph graph = HeteroGraph::build(data.stays);
  TrainConfig cfg = [] {
    TrainConfig c;
    c.dim = 64;
    return c;
  }();
  EmbeddingModel model = EmbeddingModel::for_graph(graph, cfg.dim, 1);
  SamplerSet samplers{graph, active_schemas(cfg), cfg.alpha, cfg.selection};
  SupervisedPool pool = SupervisedPool::build(graph);
  std::vector<NodeId> candidates = model.nodes_of_type(NodeType::diagnosis);
  std::vector<double> patients;

  World() {
    const auto ids = graph.nodes_of_type(NodeType::patient);
    patients.resize(ids.size() * cfg.dim);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      compose_from_graph(model, graph, ids[r], {patients.data() + r * cfg.dim, cfg.dim});
    }
  }

  kernels::BatchContext context() { return {model, graph, samplers, pool, cfg, cfg.lr0}; }
};

World& world() {
  static World w;
  return w;
}

template <bool Parallel>
void BM_score(benchmark::State& state) {
  auto& w = world();
  std::vector<double> out(w.patients.size() / w.cfg.dim * w.candidates.size());
  const kernels::ScoreArgs args{w.model, w.patients, w.candidates, out};
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::score(args);
    } else {
      kernels::serial::score(args);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

template <bool Parallel>
void BM_top_k(benchmark::State& state) {
  auto& w = world();
  const std::size_t rows = w.patients.size() / w.cfg.dim;
  std::vector<double> scores(rows * w.candidates.size());
  kernels::serial::score({w.model, w.patients, w.candidates, scores});
  const std::size_t k = 10;
  std::vector<NodeId> ids(rows * k);
  std::vector<double> top(rows * k);
  const kernels::TopKArgs args{scores, w.candidates, k, ids, top};
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::top_k(args);
    } else {
      kernels::serial::top_k(args);
    }
    benchmark::DoNotOptimize(ids.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

template <bool Parallel, bool Supervised>
void BM_batch(benchmark::State& state) {
  auto& w = world();
  const auto ctx = w.context();
  Rng rng(1);
  std::vector<Rng> rngs;
  for (int t = 0; t < kernels::omp::max_threads(); ++t) rngs.emplace_back(derive_seed(1, t));
  std::size_t samples = 0;
  for (auto _ : state) {
    kernels::BatchResult r;
    if constexpr (Parallel) {
      r = Supervised ? kernels::omp::sup_batch(ctx, rngs) : kernels::omp::unsup_batch(ctx, rngs);
    } else {
      r = Supervised ? kernels::serial::sup_batch(ctx, rng) : kernels::serial::unsup_batch(ctx, rng);
    }
    samples += r.samples;
    benchmark::DoNotOptimize(r.loss_sum);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(samples));
}

}  // namespace

BENCHMARK(BM_score<false>)->Name("score/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_score<true>)->Name("score/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_top_k<false>)->Name("top_k/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_top_k<true>)->Name("top_k/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_batch<false, false>)->Name("unsup_batch/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_batch<true, false>)->Name("unsup_batch/omp")->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_batch<false, true>)->Name("sup_batch/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_batch<true, true>)->Name("sup_batch/omp")->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
