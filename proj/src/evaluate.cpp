// SPDX-License-Identifier: Apache-2.0
#include "hinrank/evaluate.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_map>

#include "hinrank/errors.hpp"
#include "hinrank/kernels.hpp"

namespace hinrank {
namespace {

struct Prepared {
  std::vector<std::string> stay_ids;
  std::vector<std::vector<NodeId>> truths;
  std::vector<double> patients;  // rows x dim
  std::size_t cold = 0;
  std::size_t no_truth = 0;
  std::size_t unknown_events = 0;
};

std::vector<NodeId> known_diagnoses(const EmbeddingModel& model, const PatientStay& stay,
                                    const MappingOptions& mapping) {
  std::vector<NodeId> out;
  for (const auto& e : stay.events) {
    if (e.type != EventType::diagnosis) continue;
    try {
      if (auto id = model.find(map_event(e, mapping))) out.push_back(*id);
    } catch (const DataError&) {
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Prepared prepare(const EmbeddingModel& model, const std::vector<PatientStay>& test,
                 const MappingOptions& mapping) {
  Prepared p;
  for (const auto& stay : test) {
    auto truth = known_diagnoses(model, stay, mapping);
    if (truth.empty()) {
      ++p.no_truth;
      continue;
    }
    const auto inputs = diagnostic_events(stay);
    ComposeReport report;
    std::vector<double> fp;
    try {
      fp = compose_patient(model, inputs, mapping, &report);
    } catch (const ColdPatientError&) {
      ++p.cold;
      continue;
    }
    p.unknown_events += report.unknown;
    p.stay_ids.push_back(stay.stay_id);
    p.truths.push_back(std::move(truth));
    p.patients.insert(p.patients.end(), fp.begin(), fp.end());
  }
  return p;
}

void score_metrics(Evaluation& ev, const EvalOptions& options) {
  if (ev.stay_ids.empty()) return;
  for (std::size_t k : options.ks) {
    auto& ap = ev.ap[k];
    ap.resize(ev.stay_ids.size());
    double sum = 0;
    for (std::size_t i = 0; i < ap.size(); ++i) {
      ap[i] = ap_at_k(ev.rankings[i], ev.truths[i], k, options.denominator);
      sum += ap[i];
    }
    ev.map[k] = sum / static_cast<double>(ap.size());
  }
}

std::size_t max_k(const EvalOptions& options) {
  if (options.ks.empty()) throw ConfigError("no cutoff k given");
  const std::size_t k = *std::max_element(options.ks.begin(), options.ks.end());
  if (k == 0) throw ConfigError("k must be positive");
  return k;
}

Evaluation from_prepared(Prepared&& p) {
  Evaluation ev;
  ev.stay_ids = std::move(p.stay_ids);
  ev.truths = std::move(p.truths);
  ev.cold = p.cold;
  ev.no_truth = p.no_truth;
  ev.unknown_events = p.unknown_events;
  return ev;
}

}  // namespace

Evaluation evaluate(const EmbeddingModel& model, const std::vector<PatientStay>& test,
                    const EvalOptions& options) {
  const std::size_t kmax_req = max_k(options);
  Prepared p = prepare(model, test, options.mapping);
  const auto candidates = model.nodes_of_type(NodeType::diagnosis);
  const std::size_t rows = p.stay_ids.size();
  const std::size_t n = candidates.size();
  const std::size_t kmax = std::min(kmax_req, n);
  std::vector<double> patients = std::move(p.patients);
  Evaluation ev = from_prepared(std::move(p));
  if (rows == 0 || n == 0) return ev;

  std::vector<double> scores(rows * n);
  std::vector<NodeId> ids(rows * kmax);
  std::vector<double> top(rows * kmax);
  const kernels::ScoreArgs sa{model, patients, candidates, scores};
  const kernels::TopKArgs ta{scores, candidates, kmax, ids, top};
  if (options.parallel) {
    kernels::omp::score(sa);
    kernels::omp::top_k(ta);
  } else {
    kernels::serial::score(sa);
    kernels::serial::top_k(ta);
  }
  ev.rankings.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    ev.rankings[r].assign(ids.begin() + static_cast<long>(r * kmax),
                          ids.begin() + static_cast<long>((r + 1) * kmax));
  }
  score_metrics(ev, options);
  return ev;
}

Evaluation evaluate_degree_baseline(const EmbeddingModel& model, const HeteroGraph& train_graph,
                                    const std::vector<PatientStay>& test,
                                    const EvalOptions& options) {
  const std::size_t kmax_req = max_k(options);
  Prepared p = prepare(model, test, options.mapping);
  const auto candidates = model.nodes_of_type(NodeType::diagnosis);
  std::vector<std::pair<std::size_t, NodeId>> by_degree;
  by_degree.reserve(candidates.size());
  for (NodeId d : candidates) {
    const auto gid = train_graph.find(model.keys()[d]);
    by_degree.emplace_back(gid ? train_graph.degree(*gid) : 0, d);
  }
  std::sort(by_degree.begin(), by_degree.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<NodeId> ranking;
  for (std::size_t i = 0; i < std::min(kmax_req, by_degree.size()); ++i) {
    ranking.push_back(by_degree[i].second);
  }
  Evaluation ev = from_prepared(std::move(p));
  ev.rankings.assign(ev.stay_ids.size(), ranking);
  score_metrics(ev, options);
  return ev;
}

double top1_cohort_accuracy(const EmbeddingModel& model, const Evaluation& eval,
                            const std::vector<PatientStay>& test, const CohortTable& table) {
  std::unordered_map<std::string, const PatientStay*> by_id;
  for (const auto& s : test) by_id.emplace(s.stay_id, &s);
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < eval.stay_ids.size(); ++i) {
    if (eval.rankings[i].empty()) continue;
    const PatientStay* stay = by_id.at(eval.stay_ids[i]);
    std::set<std::string> cohorts;
    for (const auto& e : stay->events) {
      if (e.type != EventType::diagnosis) continue;
      if (auto c = table.map(normalize_icd9(e.name))) cohorts.insert(*c);
    }
    ++total;
    const auto predicted = table.map(model.keys()[eval.rankings[i].front()].identity);
    if (predicted && cohorts.count(*predicted)) ++correct;
  }
  if (total == 0) throw UndefinedMetricError("no evaluated stays");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double top1_cohort_accuracy(const EmbeddingModel& model, const Evaluation& eval,
                            const std::unordered_map<std::string, std::string>& stay_cohort,
                            const CohortTable& table) {
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < eval.stay_ids.size(); ++i) {
    const auto it = stay_cohort.find(eval.stay_ids[i]);
    if (it == stay_cohort.end() || eval.rankings[i].empty()) continue;
    ++total;
    const auto predicted = table.map(model.keys()[eval.rankings[i].front()].identity);
    if (predicted && *predicted == it->second) ++correct;
  }
  if (total == 0) throw UndefinedMetricError("no evaluated stay has a cohort label");
  return static_cast<double>(correct) / static_cast<double>(total);
}

MappingOptions cohort_mapping(const CohortTable& table, MappingOptions base) {
  base.diagnosis_grouping = [table](std::string_view code) { return table.map(code); };
  return base;
}

CohortPrediction predict_cohorts(const EmbeddingModel& model, const std::vector<PatientStay>& test,
                                 const CohortTable& table) {
  const MappingOptions mapping = cohort_mapping(table);
  const auto nodes = model.nodes_of_type(NodeType::diagnosis);
  CohortPrediction out;
  for (NodeId d : nodes) out.labels.push_back(model.keys()[d].identity);

  std::size_t cold = 0;
  for (const auto& stay : test) {
    std::vector<double> fp;
    try {
      fp = compose_patient(model, diagnostic_events(stay), mapping);
    } catch (const ColdPatientError&) {
      ++cold;
      continue;
    }
    const auto truth = known_diagnoses(model, stay, mapping);
    std::vector<double> row(nodes.size());
    kernels::detail::score_row(model, fp.data(), nodes, row.data());
    std::vector<int> labels(nodes.size(), 0);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      labels[j] = std::binary_search(truth.begin(), truth.end(), nodes[j]) ? 1 : 0;
    }
    out.stay_ids.push_back(stay.stay_id);
    out.scores.push_back(std::move(row));
    out.truth.push_back(std::move(labels));
  }
  if (cold) out.notices.push_back(std::to_string(cold) + " cold stays skipped");

  std::vector<double> col(out.stay_ids.size());
  std::vector<int> lab(out.stay_ids.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (std::size_t i = 0; i < col.size(); ++i) {
      col[i] = out.scores[i][j];
      lab[i] = out.truth[i][j];
    }
    try {
      out.auroc.push_back(auroc(col, lab));
    } catch (const UndefinedMetricError&) {
      out.auroc.push_back(std::nullopt);
      out.notices.push_back("cohort '" + out.labels[j] + "' has a single class; AUROC skipped");
    }
  }
  return out;
}

void write_metrics(std::ostream& out, const Evaluation& eval) {
  for (const auto& [k, v] : eval.map) out << "map@" << k << " = " << v << '\n';
  out << "evaluated = " << eval.stay_ids.size() << '\n';
  out << "cold = " << eval.cold << '\n';
  out << "no_truth = " << eval.no_truth << '\n';
  out << "unknown_events = " << eval.unknown_events << '\n';
}

void write_cohort_metrics(std::ostream& out, const CohortPrediction& pred) {
  for (std::size_t j = 0; j < pred.labels.size(); ++j) {
    out << "auroc[" << pred.labels[j] << "] = ";
    if (pred.auroc[j]) {
      out << *pred.auroc[j];
    } else {
      out << "undefined";
    }
    out << '\n';
  }
  for (const auto& n : pred.notices) out << "# " << n << '\n';
}

}  // namespace hinrank
