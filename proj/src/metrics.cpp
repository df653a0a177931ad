// SPDX-License-Identifier: Apache-2.0
#include "hinrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hinrank/errors.hpp"
#include "hinrank/rng.hpp"

namespace hinrank {

double ap_at_k(std::span<const NodeId> ranked, std::span<const NodeId> truth, std::size_t k,
               ApDenominator denominator) {
  const std::size_t n = std::min(k, ranked.size());
  double sum = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::binary_search(truth.begin(), truth.end(), ranked[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  std::size_t denom = hits;
  if (denominator == ApDenominator::min_k_truth) denom = std::min(k, truth.size());
  return denom == 0 ? 0.0 : sum / static_cast<double>(denom);
}

double map_at_k(std::span<const std::vector<NodeId>> rankings,
                std::span<const std::vector<NodeId>> truths, std::size_t k,
                ApDenominator denominator) {
  if (rankings.size() != truths.size()) throw Error("map_at_k: rankings and truths differ in length");
  if (rankings.empty()) throw UndefinedMetricError("map_at_k: no patients");
  double sum = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    sum += ap_at_k(rankings[i], truths[i], k, denominator);
  }
  return sum / static_cast<double>(rankings.size());
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("auroc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of average (1-based) ranks of the positives.
  double rank_sum = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t r = i; r < j; ++r) {
      if (labels[order[r]] != 0) {
        rank_sum += avg;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetricError("auroc needs both classes");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1) / 2) / (p * static_cast<double>(neg));
}

double paired_permutation_pvalue(std::span<const double> a, std::span<const double> b,
                                 std::size_t permutations, std::uint64_t seed) {
  if (a.size() != b.size()) throw Error("permutation test: samples differ in length");
  if (a.empty()) throw UndefinedMetricError("permutation test: no pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double observed = std::fabs(std::accumulate(diff.begin(), diff.end(), 0.0));
  // Guard against summation-order noise deciding ties.
  const double tol = 1e-12 * (1.0 + observed);
  Rng rng(seed);
  std::size_t extreme = 0;
  for (std::size_t r = 0; r < permutations; ++r) {
    double s = 0;
    for (double d : diff) s += (rng.next() & 1) ? d : -d;
    if (std::fabs(s) >= observed - tol) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + permutations);
}

}  // namespace hinrank
