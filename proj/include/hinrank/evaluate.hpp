// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hinrank/cohort.hpp"
#include "hinrank/embedding.hpp"
#include "hinrank/hin.hpp"
#include "hinrank/ingest.hpp"
#include "hinrank/metrics.hpp"
#include "hinrank/predict.hpp"

namespace hinrank {

struct EvalOptions {
  std::vector<std::size_t> ks = {3, 5, 10};
  ApDenominator denominator = ApDenominator::hits;
  MappingOptions mapping;
  bool parallel = false;  // score with the OpenMP kernels
};

/// Held-out evaluation over test stays. Inputs are each stay's diagnostic
/// events; truth is its diagnosis events restricted to the model vocabulary.
/// Stays with no known input event (cold) or no known diagnosis are skipped
/// and counted.
struct Evaluation {
  std::vector<std::string> stay_ids;                 // evaluated stays
  std::vector<std::vector<NodeId>> rankings;         // top max(k) ids per stay
  std::vector<std::vector<NodeId>> truths;           // sorted
  std::map<std::size_t, std::vector<double>> ap;     // per k, per stay
  std::map<std::size_t, double> map;                 // per k
  std::size_t cold = 0;
  std::size_t no_truth = 0;
  std::size_t unknown_events = 0;
};

Evaluation evaluate(const EmbeddingModel& model, const std::vector<PatientStay>& test,
                    const EvalOptions& options = {});

/// Same protocol, but every stay gets the same ranking: diagnosis nodes by
/// descending training degree (ties by ascending id).
Evaluation evaluate_degree_baseline(const EmbeddingModel& model, const HeteroGraph& train_graph,
                                    const std::vector<PatientStay>& test,
                                    const EvalOptions& options = {});

/// Share of evaluated stays whose top-ranked diagnosis falls in a cohort the
/// stay actually has.
double top1_cohort_accuracy(const EmbeddingModel& model, const Evaluation& eval,
                            const std::vector<PatientStay>& test, const CohortTable& table);

/// Share of evaluated stays whose top-ranked diagnosis falls in the cohort
/// given for the stay (e.g. the planted cluster's cohort).
double top1_cohort_accuracy(const EmbeddingModel& model, const Evaluation& eval,
                            const std::unordered_map<std::string, std::string>& stay_cohort,
                            const CohortTable& table);

struct CohortPrediction {
  std::vector<std::string> labels;               // cohorts present in the model
  std::vector<std::string> stay_ids;
  std::vector<std::vector<double>> scores;       // stays x labels
  std::vector<std::vector<int>> truth;           // stays x labels
  std::vector<std::optional<double>> auroc;      // per label; nullopt if skipped
  std::vector<std::string> notices;
};

/// Cohort-level prediction for a model trained with diagnoses collapsed to
/// cohort labels: scores each cohort node per stay and computes per-cohort
/// AUROC against the stays' multi-label cohort truth.
CohortPrediction predict_cohorts(const EmbeddingModel& model, const std::vector<PatientStay>& test,
                                 const CohortTable& table);

/// Mapping options that collapse diagnosis codes onto cohort labels.
MappingOptions cohort_mapping(const CohortTable& table, MappingOptions base = {});

/// "map@3 = 0.8123..." lines, then counts.
void write_metrics(std::ostream& out, const Evaluation& eval);
void write_cohort_metrics(std::ostream& out, const CohortPrediction& pred);

}  // namespace hinrank
