// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hinrank/evaluate.hpp"
#include "hinrank/trainer.hpp"

namespace hinrank {

struct AblationOptions {
  std::size_t k = 3;
  std::size_t permutations = 2000;
  bool treatment_study = true;
  bool metapath_study = true;
  std::vector<std::string> candidates;  // empty: the 9 standard metapaths
  EvalOptions eval;
};

struct AblationRow {
  std::string study;   // "treatment", "single" or "cumulative"
  std::string label;   // subset or path list
  double map = 0;
  double p_value = 1;  // paired test against the study's baseline
  std::vector<double> ap;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::size_t evaluated = 0;
};

/// Trains and evaluates one model per configuration on the same split.
///
/// Treatment study: every subset of {diag, pres, proc}, simple links only;
/// baseline is the empty subset. Metapath study: all treatment nodes, simple
/// links plus one candidate metapath each (single), then the candidates
/// added one at a time in descending single-path MAP (cumulative); baseline
/// is simple links with no metapath.
AblationReport run_ablation(const std::vector<PatientStay>& train_stays,
                            const std::vector<PatientStay>& test_stays, const TrainConfig& base,
                            const AblationOptions& options = {}, std::ostream* log = nullptr);

/// MAP@k of a configuration on a fixed split (training graph built from
/// train_stays with options.eval.mapping).
Evaluation train_and_evaluate(const std::vector<PatientStay>& train_stays,
                              const std::vector<PatientStay>& test_stays, const TrainConfig& cfg,
                              const EvalOptions& options);

/// "study\tlabel\tmap@k\tp_value" lines.
void write_ablation(std::ostream& out, const AblationReport& report, std::size_t k);

}  // namespace hinrank
