// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hinrank/kernels.hpp"
#include "oracles.hpp"

using namespace hinrank;

namespace {

struct Fixture {
  HeteroGraph g;
  EmbeddingModel model;
  std::vector<double> patients;
  std::vector<NodeId> candidates;
  std::size_t rows;

  static HeteroGraph build(std::uint64_t seed) {
    Rng rng(seed);
    return HeteroGraph::build(oracle::random_stays(rng, 40, 30));
  }

  explicit Fixture(std::uint64_t seed, std::size_t rows_ = 37)
      : g(build(seed)), rows(rows_) {
    Rng rng(seed + 1);
    model = EmbeddingModel::for_graph(g, 9, seed);
    const auto diags = g.nodes_of_type(NodeType::diagnosis);
    candidates.assign(diags.begin(), diags.end());
    patients.resize(rows * model.dim());
    for (double& x : patients) x = rng.uniform(-1, 1);
    // A few exact ties.
    for (std::size_t i = 0; i < model.dim(); ++i) patients[i] = 0;
  }
};

}  // namespace

TEST_CASE("parallel scoring equals the serial reference") {
  Fixture f(1);
  const std::size_t n = f.candidates.size();
  std::vector<double> a(f.rows * n), b(f.rows * n);
  kernels::serial::score({f.model, f.patients, f.candidates, a});
  kernels::omp::score({f.model, f.patients, f.candidates, b});
  CHECK(a == b);

  const std::size_t k = 7;
  std::vector<NodeId> ia(f.rows * k), ib(f.rows * k);
  std::vector<double> sa(f.rows * k), sb(f.rows * k);
  kernels::serial::top_k({a, f.candidates, k, ia, sa});
  kernels::omp::top_k({a, f.candidates, k, ib, sb});
  CHECK(ia == ib);
  CHECK(sa == sb);
}

TEST_CASE("top-k matches a full sort") {
  Fixture f(2);
  const std::size_t n = f.candidates.size();
  std::vector<double> scores(f.rows * n);
  kernels::serial::score({f.model, f.patients, f.candidates, scores});
  const std::size_t k = n;
  std::vector<NodeId> ids(f.rows * k);
  std::vector<double> top(f.rows * k);
  kernels::serial::top_k({scores, f.candidates, k, ids, top});
  for (std::size_t r = 0; r < f.rows; ++r) {
    std::vector<std::pair<double, NodeId>> expect;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < f.model.dim(); ++i) {
        s += f.model.vec(f.candidates[j])[i] * f.patients[r * f.model.dim() + i];
      }
      expect.emplace_back(-s, f.candidates[j]);
    }
    std::sort(expect.begin(), expect.end());
    for (std::size_t j = 0; j < k; ++j) {
      CHECK(ids[r * k + j] == expect[j].second);
      CHECK(top[r * k + j] == doctest::Approx(-expect[j].first));
    }
  }
  // Row 0 is all zeros: ties resolve to ascending id.
  CHECK(std::is_sorted(ids.begin(), ids.begin() + static_cast<long>(k)));
}

TEST_CASE("decay shrinks touched vectors before the gradient term") {
  Rng rng(3);
  const auto g = HeteroGraph::build(oracle::random_stays(rng, 10, 5));
  const auto pool = SupervisedPool::build(g);
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.lambda = 0.5;
  cfg.margin = 1e-9;
  cfg.sup_negatives = 3;
  auto model = EmbeddingModel::for_graph(g, cfg.dim, 1);
  // Make every patient's true diagnoses outscore everything else, so the
  // hinge is inactive and only the decay acts.
  for (NodeId d : g.nodes_of_type(NodeType::diagnosis)) {
    for (double& x : model.vec(d)) x = -1;
  }
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto e = to_event_type(g.type(v));
    if (e && is_diagnostic(*e)) {
      for (double& x : model.vec(v)) x = 1;
    }
  }
  const std::size_t slot = 0;
  for (NodeId d : pool.diagnoses[slot]) {
    for (double& x : model.vec(d)) x = 1;
  }
  const SamplerSet samplers(g, {PathSchema::parse("pati-symp")});
  const double lr = 0.1;
  const kernels::BatchContext ctx{model, g, samplers, pool, cfg, lr};
  // Draw until the fixed patient comes up.
  for (std::uint64_t seed = 0;; ++seed) {
    Rng probe(seed);
    if (probe.below(pool.patients.size()) != slot) continue;
    const auto before = model;
    Rng r(seed);
    CHECK(kernels::sup_sample(ctx, r) == 0.0);
    std::size_t shrunk = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      const auto a = before.vec(v);
      const auto b = model.vec(v);
      if (std::equal(a.begin(), a.end(), b.begin())) continue;
      ++shrunk;
      for (std::size_t i = 0; i < cfg.dim; ++i) CHECK(b[i] == doctest::Approx(a[i] * (1 - lr * cfg.lambda)));
    }
    CHECK(shrunk > 0);
    break;
  }
}

TEST_CASE("parallel training kernels learn") {
  Rng rng(4);
  const auto g = HeteroGraph::build(oracle::random_stays(rng, 60, 8));
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.batch = 20;
  cfg.epochs = 20;
  cfg.sup_negatives = 5;
  cfg.deterministic = false;
  cfg.threads = 2;
  const auto r = train(g, cfg);
  CHECK(r.stats.steps == 20 * 3);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    for (double x : r.model.vec(v)) CHECK(std::isfinite(x));
  }
  CHECK(kernels::omp::max_threads() >= 1);
}
