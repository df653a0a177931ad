// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hinrank/embedding.hpp"
#include "hinrank/ingest.hpp"

namespace hinrank {

struct ComposeReport {
  std::size_t used = 0;      // events found in the vocabulary
  std::size_t unknown = 0;   // mapped, but not in the vocabulary
  std::size_t rejected = 0;  // failed their mapping rule
};

/// f(p) = sum_t w_t * mean of the known type-t event vectors, over
/// diagnostic types. Unknown and unmappable events are skipped and counted.
/// Throws LeakageError if any treatment-type event is present and
/// ColdPatientError if no event is known.
std::vector<double> compose_patient(const EmbeddingModel& model,
                                    std::span<const ClinicalEvent> events,
                                    const MappingOptions& options = {},
                                    ComposeReport* report = nullptr);

/// Diagnostic events of a stay (treatment events removed).
std::vector<ClinicalEvent> diagnostic_events(const PatientStay& stay);

struct RankedPrediction {
  std::string patient;
  std::vector<std::pair<NodeId, double>> items;  // descending score, ties by ascending id
};

/// Scores every diagnosis node of the model against the patient vector and
/// sorts. With k, only the top-k prefix is kept.
RankedPrediction rank_diagnoses(const EmbeddingModel& model, std::span<const double> patient_vector,
                                std::optional<std::size_t> k = std::nullopt);

/// Same over an explicit candidate list.
RankedPrediction rank_candidates(const EmbeddingModel& model, std::span<const NodeId> candidates,
                                 std::span<const double> patient_vector,
                                 std::optional<std::size_t> k = std::nullopt);

}  // namespace hinrank
