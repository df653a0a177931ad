// SPDX-License-Identifier: Apache-2.0
#pragma once

// Independent reference computations for tests. Nothing here calls the
// library routine it is meant to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hinrank/embedding.hpp"
#include "hinrank/hin.hpp"
#include "hinrank/ingest.hpp"
#include "hinrank/rng.hpp"

namespace oracle {

using hinrank::NodeId;
using PairDist = std::map<std::pair<NodeId, NodeId>, double>;

/// Random stays over small vocabularies. Every stay gets at least one
/// symptom and one diagnosis; other types appear with probability 0.7.
inline std::vector<hinrank::PatientStay> random_stays(hinrank::Rng& rng, std::size_t patients,
                                                      std::size_t vocab) {
  using hinrank::EventType;
  std::vector<hinrank::PatientStay> out;
  for (std::size_t i = 0; i < patients; ++i) {
    hinrank::PatientStay s;
    s.stay_id = "p" + std::to_string(i);
    auto add = [&](EventType t, std::size_t min_count, std::size_t max_count) {
      const std::size_t n = min_count + rng.below(max_count - min_count + 1);
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t item = rng.below(vocab);
        switch (t) {
          case EventType::laboratory:
            s.events.push_back({t, "l" + std::to_string(item), rng.bernoulli(0.5) ? "normal" : "abnormal"});
            break;
          case EventType::diagnosis:
            s.events.push_back({t, std::to_string(401 + item), std::nullopt});
            break;
          case EventType::procedure:
            s.events.push_back({t, std::to_string(3800 + item), std::nullopt});
            break;
          case EventType::age:
            s.events.push_back({t, "age", std::to_string(20 + 25 * rng.below(3))});
            break;
          default:
            s.events.push_back({t, std::string(hinrank::type_tag(t)) + std::to_string(item), std::nullopt});
        }
      }
    };
    add(EventType::symptom, 1, 3);
    add(EventType::diagnosis, 1, 3);
    if (rng.bernoulli(0.7)) add(EventType::laboratory, 1, 3);
    if (rng.bernoulli(0.7)) add(EventType::prescription, 1, 2);
    if (rng.bernoulli(0.7)) add(EventType::procedure, 1, 2);
    if (rng.bernoulli(0.7)) add(EventType::age, 1, 1);
    out.push_back(std::move(s));
  }
  return out;
}

/// Path-pair probabilities by pair-centric counting: for every node pair
/// (a, b) of the endpoint types, count patients adjacent to both. For
/// same-type paths the pair is unordered and keyed (min, max).
inline PairDist path_pair_distribution(const hinrank::HeteroGraph& g, const hinrank::PathSchema& path) {
  PairDist counts;
  double total = 0;
  auto adjacent = [&](NodeId p, NodeId x) {
    const auto n = g.neighbors(p, g.type(x));
    return std::find(n.begin(), n.end(), x) != n.end();
  };
  const auto patients = g.nodes_of_type(hinrank::NodeType::patient);
  if (!path.is_metapath()) {
    const hinrank::NodeType other =
        path.types[0] == hinrank::NodeType::patient ? path.types[1] : path.types[0];
    for (NodeId p : patients) {
      for (NodeId x : g.nodes_of_type(other)) {
        if (!adjacent(p, x)) continue;
        const auto key = path.types[0] == hinrank::NodeType::patient ? std::make_pair(p, x)
                                                                     : std::make_pair(x, p);
        counts[key] += 1;
        total += 1;
      }
    }
  } else {
    const bool same = path.types[0] == path.types[2];
    for (NodeId a : g.nodes_of_type(path.types[0])) {
      for (NodeId b : g.nodes_of_type(path.types[2])) {
        if (same && !(a < b)) continue;
        double shared = 0;
        for (NodeId p : patients) shared += (adjacent(p, a) && adjacent(p, b)) ? 1 : 0;
        if (shared == 0) continue;
        counts[{a, b}] = shared;
        total += shared;
      }
    }
  }
  for (auto& [k, v] : counts) v /= total;
  return counts;
}

inline double total_variation(const PairDist& p, const PairDist& q) {
  std::set<std::pair<NodeId, NodeId>> keys;
  for (const auto& [k, v] : p) keys.insert(k);
  for (const auto& [k, v] : q) keys.insert(k);
  double tv = 0;
  for (const auto& k : keys) {
    const auto a = p.find(k);
    const auto b = q.find(k);
    tv += std::fabs((a == p.end() ? 0.0 : a->second) - (b == q.end() ? 0.0 : b->second));
  }
  return tv / 2;
}

/// AP@k straight from the definition: walk the first k positions, record
/// precision at every hit, average over hits (or over min(k, |truth|)).
inline double ap_at_k(const std::vector<NodeId>& ranked, const std::set<NodeId>& truth, std::size_t k,
                      bool min_k_truth = false) {
  std::vector<double> precisions;
  for (std::size_t pos = 1; pos <= k && pos <= ranked.size(); ++pos) {
    if (!truth.count(ranked[pos - 1])) continue;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < pos; ++j) hits += truth.count(ranked[j]);
    precisions.push_back(static_cast<double>(hits) / static_cast<double>(pos));
  }
  double sum = 0;
  for (double x : precisions) sum += x;
  const double denom = min_k_truth ? static_cast<double>(std::min(k, truth.size()))
                                   : static_cast<double>(precisions.size());
  return denom == 0 ? 0.0 : sum / denom;
}

/// O(P*N) pair counting.
inline double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Central difference of f with respect to *x.
inline double central_difference(double* x, const std::function<double()>& f, double h) {
  const double saved = *x;
  *x = saved + h;
  const double up = f();
  *x = saved - h;
  const double down = f();
  *x = saved;
  return (up - down) / (2 * h);
}

inline double relative_error(double a, double b) {
  return std::fabs(a - b) / std::max({1e-8, std::fabs(a), std::fabs(b)});
}

}  // namespace oracle
