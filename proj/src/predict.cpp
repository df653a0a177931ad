// SPDX-License-Identifier: Apache-2.0
#include "hinrank/predict.hpp"

#include <algorithm>
#include <array>

#include "hinrank/errors.hpp"
#include "hinrank/kernels.hpp"

namespace hinrank {

std::vector<double> compose_patient(const EmbeddingModel& model,
                                    std::span<const ClinicalEvent> events,
                                    const MappingOptions& options, ComposeReport* report) {
  if (!model.has_vocabulary()) throw ConfigError("model has no vocabulary");
  ComposeReport local;
  std::array<std::vector<NodeId>, kDiagnosticTypeCount> known;
  for (const ClinicalEvent& e : events) {
    if (!is_diagnostic(e.type)) {
      throw LeakageError("treatment event '" + std::string(type_tag(e.type)) + ":" + e.name +
                         "' in prediction input");
    }
    NodeKey key;
    try {
      key = map_event(e, options);
    } catch (const DataError&) {
      ++local.rejected;
      continue;
    }
    const auto id = model.find(key);
    if (!id) {
      ++local.unknown;
      continue;
    }
    known[index_of(e.type)].push_back(*id);
  }

  // Same arithmetic order as the graph composition: per type, ascending
  // distinct ids.
  std::vector<double> out(model.dim(), 0.0);
  for (EventType t : kDiagnosticTypes) {
    auto& ids = known[index_of(t)];
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty()) continue;
    local.used += ids.size();
    const double scale = model.type_weight(t) / static_cast<double>(ids.size());
    for (NodeId n : ids) {
      const auto fn = model.vec(n);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * fn[i];
    }
  }
  if (report) *report = local;
  if (local.used == 0) throw ColdPatientError("no known diagnostic event");
  return out;
}

std::vector<ClinicalEvent> diagnostic_events(const PatientStay& stay) {
  std::vector<ClinicalEvent> out;
  for (const auto& e : stay.events) {
    if (is_diagnostic(e.type)) out.push_back(e);
  }
  return out;
}

RankedPrediction rank_candidates(const EmbeddingModel& model, std::span<const NodeId> candidates,
                                 std::span<const double> patient_vector,
                                 std::optional<std::size_t> k) {
  if (patient_vector.size() != model.dim()) throw ConfigError("patient vector dimension mismatch");
  std::vector<double> scores(candidates.size());
  kernels::detail::score_row(model, patient_vector.data(), candidates, scores.data());
  const std::size_t kk = std::min(k.value_or(candidates.size()), candidates.size());
  std::vector<NodeId> ids(kk);
  std::vector<double> top(kk);
  kernels::detail::top_k_row(scores.data(), candidates, kk, ids.data(), top.data());
  RankedPrediction out;
  out.items.reserve(kk);
  for (std::size_t i = 0; i < kk; ++i) out.items.emplace_back(ids[i], top[i]);
  return out;
}

RankedPrediction rank_diagnoses(const EmbeddingModel& model, std::span<const double> patient_vector,
                                std::optional<std::size_t> k) {
  const auto candidates = model.nodes_of_type(NodeType::diagnosis);
  return rank_candidates(model, candidates, patient_vector, k);
}

}  // namespace hinrank
