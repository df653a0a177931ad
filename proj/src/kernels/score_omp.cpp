// SPDX-License-Identifier: Apache-2.0
#include <omp.h>

#include "hinrank/kernels.hpp"

namespace hinrank::kernels {

namespace omp {

void score(const ScoreArgs& a) {
  const std::size_t d = a.model.dim();
  const auto rows = static_cast<long>(a.patients.size() / d);
#pragma omp parallel for schedule(static)
  for (long r = 0; r < rows; ++r) {
    const auto row = static_cast<std::size_t>(r);
    detail::score_row(a.model, a.patients.data() + row * d, a.candidates,
                      a.out.data() + row * a.candidates.size());
  }
}

void top_k(const TopKArgs& a) {
  const std::size_t n = a.candidates.size();
  const auto rows = static_cast<long>(n ? a.scores.size() / n : 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (long r = 0; r < rows; ++r) {
    const auto row = static_cast<std::size_t>(r);
    detail::top_k_row(a.scores.data() + row * n, a.candidates, a.k, a.out_ids.data() + row * a.k,
                      a.out_scores.data() + row * a.k);
  }
}

}  // namespace omp
}  // namespace hinrank::kernels
