// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <numeric>
#include <vector>

#include "hinrank/kernels.hpp"

namespace hinrank::kernels {

namespace detail {

void score_row(const EmbeddingModel& model, const double* patient,
               std::span<const NodeId> candidates, double* out) {
  const std::size_t d = model.dim();
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto f = model.vec(candidates[j]);
    double s = 0;
    for (std::size_t i = 0; i < d; ++i) s += f[i] * patient[i];
    out[j] = s;
  }
}

void top_k_row(const double* scores, std::span<const NodeId> candidates, std::size_t k,
               NodeId* out_ids, double* out_scores) {
  thread_local std::vector<std::size_t> order;
  order.resize(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  };
  const std::size_t kk = std::min(k, candidates.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(kk), order.end(), before);
  for (std::size_t i = 0; i < kk; ++i) {
    out_ids[i] = candidates[order[i]];
    out_scores[i] = scores[order[i]];
  }
}

}  // namespace detail

namespace serial {

void score(const ScoreArgs& a) {
  const std::size_t d = a.model.dim();
  const std::size_t rows = a.patients.size() / d;
  for (std::size_t r = 0; r < rows; ++r) {
    detail::score_row(a.model, a.patients.data() + r * d, a.candidates,
                      a.out.data() + r * a.candidates.size());
  }
}

void top_k(const TopKArgs& a) {
  const std::size_t n = a.candidates.size();
  const std::size_t rows = n ? a.scores.size() / n : 0;
  for (std::size_t r = 0; r < rows; ++r) {
    detail::top_k_row(a.scores.data() + r * n, a.candidates, a.k, a.out_ids.data() + r * a.k,
                      a.out_scores.data() + r * a.k);
  }
}

}  // namespace serial
}  // namespace hinrank::kernels
