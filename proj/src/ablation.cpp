// SPDX-License-Identifier: Apache-2.0
#include "hinrank/ablation.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "hinrank/errors.hpp"

namespace hinrank {
namespace {

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

Evaluation train_and_evaluate(const std::vector<PatientStay>& train_stays,
                              const std::vector<PatientStay>& test_stays, const TrainConfig& cfg,
                              const EvalOptions& options) {
  const HeteroGraph g = HeteroGraph::build(train_stays, NetworkSchema::standard(), options.mapping);
  const TrainResult r = train(g, cfg);
  return evaluate(r.model, test_stays, options);
}

AblationReport run_ablation(const std::vector<PatientStay>& train_stays,
                            const std::vector<PatientStay>& test_stays, const TrainConfig& base,
                            const AblationOptions& options, std::ostream* log) {
  EvalOptions eval = options.eval;
  eval.ks = {options.k};
  AblationReport report;

  auto run = [&](const std::string& study, const std::string& label, const TrainConfig& cfg) {
    if (log) *log << "ablate " << study << ' ' << label << '\n';
    Evaluation ev = train_and_evaluate(train_stays, test_stays, cfg, eval);
    if (ev.stay_ids.empty()) throw DataError("no test stay could be evaluated");
    report.evaluated = ev.stay_ids.size();
    AblationRow row;
    row.study = study;
    row.label = label;
    row.map = ev.map.at(options.k);
    row.ap = std::move(ev.ap.at(options.k));
    return row;
  };
  auto against = [&](AblationRow row, const AblationRow& baseline, std::uint64_t stream) {
    if (row.ap.size() != baseline.ap.size()) throw Error("ablation runs evaluated different stays");
    row.p_value = paired_permutation_pvalue(row.ap, baseline.ap, options.permutations,
                                            derive_seed(base.seed, 1000 + stream));
    return row;
  };

  std::uint64_t stream = 0;
  if (options.treatment_study) {
    TrainConfig cfg = base;
    cfg.schemas.clear();
    cfg.simple_links = true;
    cfg.treatment.clear();
    const AblationRow baseline = run("treatment", "none", cfg);
    report.rows.push_back(baseline);
    const std::vector<std::vector<EventType>> subsets = {
        {EventType::diagnosis},
        {EventType::prescription},
        {EventType::procedure},
        {EventType::diagnosis, EventType::prescription},
        {EventType::diagnosis, EventType::procedure},
        {EventType::prescription, EventType::procedure},
        {EventType::diagnosis, EventType::prescription, EventType::procedure}};
    for (const auto& subset : subsets) {
      cfg.treatment = subset;
      std::vector<std::string> tags;
      for (EventType t : subset) tags.emplace_back(type_tag(t));
      report.rows.push_back(against(run("treatment", join(tags, "+"), cfg), baseline, ++stream));
    }
  }

  if (options.metapath_study) {
    std::vector<std::string> candidates = options.candidates;
    if (candidates.empty()) {
      for (const auto& p : candidate_metapaths()) candidates.push_back(p.label);
    }
    TrainConfig cfg = base;
    cfg.simple_links = true;
    cfg.treatment = {EventType::diagnosis, EventType::prescription, EventType::procedure};
    cfg.schemas.clear();
    const AblationRow baseline = run("metapath", "none", cfg);
    report.rows.push_back(baseline);

    std::vector<AblationRow> singles;
    for (const auto& c : candidates) {
      cfg.schemas = {c};
      singles.push_back(against(run("single", c, cfg), baseline, ++stream));
    }
    std::stable_sort(singles.begin(), singles.end(),
                     [](const AblationRow& a, const AblationRow& b) { return a.map > b.map; });
    std::vector<std::string> added;
    std::vector<AblationRow> cumulative;
    for (const auto& s : singles) {
      added.push_back(s.label);
      cfg.schemas = added;
      cumulative.push_back(against(run("cumulative", join(added, "+"), cfg), baseline, ++stream));
    }
    report.rows.insert(report.rows.end(), singles.begin(), singles.end());
    report.rows.insert(report.rows.end(), cumulative.begin(), cumulative.end());
  }
  return report;
}

void write_ablation(std::ostream& out, const AblationReport& report, std::size_t k) {
  out << "study\tconfiguration\tmap@" << k << "\tp_value\n";
  char buf[64];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.6f\t%.4f", r.map, r.p_value);
    out << r.study << '\t' << r.label << '\t' << buf << '\n';
  }
  out << "# evaluated stays: " << report.evaluated << '\n';
}

}  // namespace hinrank
