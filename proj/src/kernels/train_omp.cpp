// SPDX-License-Identifier: Apache-2.0
#include <omp.h>

#include <algorithm>

#include "hinrank/kernels.hpp"

namespace hinrank::kernels::omp {

int max_threads() { return omp_get_max_threads(); }

namespace {

int thread_count(const BatchContext& ctx, std::size_t rngs) {
  const int wanted = ctx.cfg.threads > 0 ? ctx.cfg.threads : omp_get_max_threads();
  return std::max(1, std::min(wanted, static_cast<int>(rngs)));
}

}  // namespace

// Hogwild: samples run concurrently against the shared table.
BatchResult unsup_batch(const BatchContext& ctx, std::span<Rng> rngs) {
  double loss = 0;
  const auto n = static_cast<long>(ctx.cfg.batch);
#pragma omp parallel for num_threads(thread_count(ctx, rngs.size())) reduction(+ : loss) schedule(static)
  for (long i = 0; i < n; ++i) {
    loss += unsup_sample(ctx, rngs[static_cast<std::size_t>(omp_get_thread_num())]);
  }
  return {loss, ctx.cfg.batch};
}

BatchResult sup_batch(const BatchContext& ctx, std::span<Rng> rngs) {
  double loss = 0;
  std::size_t samples = 0;
  const auto n = static_cast<long>(ctx.cfg.batch);
#pragma omp parallel for num_threads(thread_count(ctx, rngs.size())) reduction(+ : loss, samples) schedule(static)
  for (long i = 0; i < n; ++i) {
    const double l = sup_sample(ctx, rngs[static_cast<std::size_t>(omp_get_thread_num())]);
    if (l >= 0) {
      loss += l;
      ++samples;
    }
  }
  return {loss, samples};
}

}  // namespace hinrank::kernels::omp
