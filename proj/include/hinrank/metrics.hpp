// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hinrank/hin.hpp"

namespace hinrank {

enum class ApDenominator {
  hits,          // number of correct items within the top k
  min_k_truth,   // min(k, |truth|)
};

/// Mean of precision@i over the positions i <= k holding a correct item.
/// `truth` must be sorted. 0 when the top k contains no correct item.
double ap_at_k(std::span<const NodeId> ranked, std::span<const NodeId> truth, std::size_t k,
               ApDenominator denominator = ApDenominator::hits);

/// Arithmetic mean of ap_at_k across patients. Throws on length mismatch
/// or empty input.
double map_at_k(std::span<const std::vector<NodeId>> rankings,
                std::span<const std::vector<NodeId>> truths, std::size_t k,
                ApDenominator denominator = ApDenominator::hits);

/// Mann-Whitney AUROC with ties counted 1/2. Throws UndefinedMetricError
/// unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Two-sided paired sign-flip permutation test on per-item differences
/// a[i] - b[i]. Returns the p-value (add-one smoothed).
double paired_permutation_pvalue(std::span<const double> a, std::span<const double> b,
                                 std::size_t permutations, std::uint64_t seed);

}  // namespace hinrank
