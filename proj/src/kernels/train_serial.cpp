// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <vector>

#include "hinrank/kernels.hpp"

namespace hinrank::kernels {

namespace {

// (1 - lr*lambda) shrink of each distinct vector in `touched`.
void decay(EmbeddingModel& model, std::vector<NodeId>& touched, double factor) {
  if (factor == 1.0) return;
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (NodeId id : touched) {
    for (double& x : model.vec(id)) x *= factor;
  }
}

}  // namespace

double unsup_sample(const BatchContext& ctx, Rng& rng) {
  thread_local std::vector<NodeId> negatives;
  thread_local std::vector<NodeId> touched;
  const std::size_t schema = ctx.samplers.sample_schema(rng);
  const auto [v, c] = ctx.samplers.sample_positive_pair(schema, rng);
  ctx.samplers.sample_negatives(ctx.samplers.schemas()[schema].destination(), c,
                                ctx.cfg.unsup_negatives, rng, negatives);
  touched.assign(negatives.begin(), negatives.end());
  touched.push_back(v);
  touched.push_back(c);
  decay(ctx.model, touched, 1.0 - ctx.lr * ctx.cfg.lambda);
  return unsup_step(ctx.model, v, c, negatives, ctx.lr);
}

double sup_sample(const BatchContext& ctx, Rng& rng) {
  thread_local std::vector<NodeId> negatives;
  thread_local std::vector<NodeId> touched;
  const std::size_t slot = rng.below(ctx.pool.patients.size());
  const NodeId p = ctx.pool.patients[slot];
  const auto& diagnoses = ctx.pool.diagnoses[slot];
  const NodeId d_pos = diagnoses[rng.below(diagnoses.size())];
  if (!ctx.samplers.sample_negatives_excluding(NodeType::diagnosis, diagnoses,
                                               ctx.cfg.sup_negatives, rng, negatives)) {
    return -1.0;
  }
  touched.assign(negatives.begin(), negatives.end());
  touched.push_back(d_pos);
  for (EventType t : kDiagnosticTypes) {
    const auto nbrs = ctx.graph.neighbors(p, to_node_type(t));
    touched.insert(touched.end(), nbrs.begin(), nbrs.end());
  }
  decay(ctx.model, touched, 1.0 - ctx.lr * ctx.cfg.lambda);
  // Step on the mean hinge over the negatives.
  const double lr = ctx.lr / static_cast<double>(negatives.size());
  return sup_step(ctx.model, ctx.graph, p, d_pos, negatives, lr, ctx.cfg.margin) /
         static_cast<double>(negatives.size());
}

namespace serial {

BatchResult unsup_batch(const BatchContext& ctx, Rng& rng) {
  BatchResult r;
  for (std::size_t i = 0; i < ctx.cfg.batch; ++i) {
    r.loss_sum += unsup_sample(ctx, rng);
    ++r.samples;
  }
  return r;
}

BatchResult sup_batch(const BatchContext& ctx, Rng& rng) {
  BatchResult r;
  for (std::size_t i = 0; i < ctx.cfg.batch; ++i) {
    const double loss = sup_sample(ctx, rng);
    if (loss < 0) continue;
    r.loss_sum += loss;
    ++r.samples;
  }
  return r;
}

}  // namespace serial
}  // namespace hinrank::kernels
