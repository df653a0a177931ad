// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel kernels. Each has a serial reference in kernels::serial and
// an OpenMP version in kernels::omp with the same contract. Scoring kernels
// produce identical results in both; the OpenMP training kernels update
// shared vectors without locks (lost updates are tolerated), so they are
// only equivalent in distribution.

#include <cstddef>
#include <span>
#include <vector>

#include "hinrank/embedding.hpp"
#include "hinrank/rng.hpp"
#include "hinrank/sampling.hpp"
#include "hinrank/trainer.hpp"

namespace hinrank::kernels {

/// out[r * candidates.size() + j] = f(candidates[j]) . patients[r * dim ...].
struct ScoreArgs {
  const EmbeddingModel& model;
  std::span<const double> patients;  // rows x dim, row-major
  std::span<const NodeId> candidates;
  std::span<double> out;
};

/// Per-row top-k ordering (descending score, ties by ascending node id).
/// out_ids is rows x k; k must not exceed the candidate count.
struct TopKArgs {
  std::span<const double> scores;  // rows x n
  std::span<const NodeId> candidates;
  std::size_t k;
  std::span<NodeId> out_ids;
  std::span<double> out_scores;
};

struct BatchContext {
  EmbeddingModel& model;
  const HeteroGraph& graph;
  const SamplerSet& samplers;
  const SupervisedPool& pool;
  const TrainConfig& cfg;
  double lr;
};

struct BatchResult {
  double loss_sum = 0;
  std::size_t samples = 0;
};

/// One unsupervised sample: schema, positive pair, negatives at the
/// destination type, decay of the touched vectors, gradient step.
double unsup_sample(const BatchContext& ctx, Rng& rng);
/// One supervised sample: patient, positive diagnosis, degree-drawn
/// negative diagnoses, decay of the touched vectors, hinge step. Returns
/// a negative value if the patient has no admissible negatives.
double sup_sample(const BatchContext& ctx, Rng& rng);

namespace detail {
void score_row(const EmbeddingModel& model, const double* patient,
               std::span<const NodeId> candidates, double* out);
void top_k_row(const double* scores, std::span<const NodeId> candidates, std::size_t k,
               NodeId* out_ids, double* out_scores);
}  // namespace detail

namespace serial {
void score(const ScoreArgs& args);
void top_k(const TopKArgs& args);
BatchResult unsup_batch(const BatchContext& ctx, Rng& rng);
BatchResult sup_batch(const BatchContext& ctx, Rng& rng);
}  // namespace serial

namespace omp {
void score(const ScoreArgs& args);
void top_k(const TopKArgs& args);
/// rngs[i] is used by OpenMP thread i; needs at least omp_get_max_threads().
BatchResult unsup_batch(const BatchContext& ctx, std::span<Rng> rngs);
BatchResult sup_batch(const BatchContext& ctx, std::span<Rng> rngs);
int max_threads();
}  // namespace omp

}  // namespace hinrank::kernels
