// SPDX-License-Identifier: Apache-2.0
#include "hinrank/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "hinrank/errors.hpp"

namespace hinrank {

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw ConfigError("alias table needs at least one outcome");
  total_ = 0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0) throw ConfigError("alias weights must be finite and >= 0");
    total_ += w;
  }
  if (total_ <= 0) throw ConfigError("alias weights are all zero");

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total_;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  for (auto i : small) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
}

std::size_t AliasTable::sample(Rng& rng) const {
  const std::size_t i = rng.below(prob_.size());
  return rng.uniform() < prob_[i] ? i : alias_[i];
}

std::size_t sample_schema(std::span<const PathSchema> active, Rng& rng) {
  if (active.empty()) throw ConfigError("no active path schemas to sample from");
  return rng.below(active.size());
}

namespace {

double pair_weight(const HeteroGraph& g, NodeId p, const PathSchema& path) {
  if (!path.is_metapath()) {
    const NodeType other = path.types[0] == NodeType::patient ? path.types[1] : path.types[0];
    return static_cast<double>(g.neighbors(p, other).size());
  }
  const double na = static_cast<double>(g.neighbors(p, path.types[0]).size());
  if (path.types[0] == path.types[2]) return na * (na - 1) / 2;
  return na * static_cast<double>(g.neighbors(p, path.types[2]).size());
}

}  // namespace

SamplerSet::SamplerSet(const HeteroGraph& g, const std::vector<PathSchema>& schemas, double alpha,
                       SchemaSelection selection)
    : g_(&g), selection_(selection), alpha_(alpha), negative_(kNodeTypeCount) {
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw ConfigError("degree exponent must be >= 0");

  for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
    const auto nodes = g.nodes_of_type(static_cast<NodeType>(t));
    if (nodes.empty()) continue;
    NegativeSampler& ns = negative_[t];
    ns.weights.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double deg = static_cast<double>(g.degree(nodes[i]));
      ns.weights[i] = deg > 0 ? std::pow(deg, alpha) : 0.0;
    }
    double total = 0;
    for (double w : ns.weights) total += w;
    if (total > 0) {
      ns.table = AliasTable(ns.weights);
      ns.ready = true;
    }
  }

  std::vector<double> schema_weights;
  for (const auto& path : schemas) {
    validate(path, g.schema());
    const auto dest_nodes = g.nodes_of_type(path.destination());
    if (dest_nodes.size() < 2 || !negative_[index_of(path.destination())].ready) {
      notices_.push_back("schema " + path.label + " deactivated: fewer than two " +
                         std::string(type_tag(path.destination())) + " nodes");
      continue;
    }
    PositiveSampler ps;
    std::vector<double> weights;
    double total = 0;
    for (NodeId p : g.nodes_of_type(NodeType::patient)) {
      const double w = pair_weight(g, p, path);
      if (w <= 0) continue;
      ps.patient_ids.push_back(p);
      weights.push_back(w);
      total += w;
    }
    if (total <= 0) {
      notices_.push_back("schema " + path.label + " deactivated: no path instances");
      continue;
    }
    ps.patients = AliasTable(weights);
    positive_.push_back(std::move(ps));
    schemas_.push_back(path);
    schema_weights.push_back(total);
  }
  if (!schemas_.empty() && selection_ == SchemaSelection::proportional) {
    schema_table_ = AliasTable(schema_weights);
  }
}

std::size_t SamplerSet::sample_schema(Rng& rng) const {
  if (schemas_.empty()) throw ConfigError("no active path schemas to sample from");
  if (selection_ == SchemaSelection::proportional) return schema_table_.sample(rng);
  return hinrank::sample_schema(schemas_, rng);
}

std::pair<NodeId, NodeId> SamplerSet::sample_positive_pair(std::size_t schema, Rng& rng) const {
  if (schema >= schemas_.size()) throw ConfigError("schema index out of range");
  positive_draws_.fetch_add(1, std::memory_order_relaxed);
  const PathSchema& path = schemas_[schema];
  const PositiveSampler& ps = positive_[schema];
  const NodeId p = ps.patient_ids[ps.patients.sample(rng)];
  if (!path.is_metapath()) {
    const bool patient_first = path.types[0] == NodeType::patient;
    const auto nbrs = g_->neighbors(p, patient_first ? path.types[1] : path.types[0]);
    const NodeId x = nbrs[rng.below(nbrs.size())];
    return patient_first ? std::make_pair(p, x) : std::make_pair(x, p);
  }
  const auto left = g_->neighbors(p, path.types[0]);
  if (path.types[0] == path.types[2]) {
    const std::size_t i = rng.below(left.size());
    std::size_t j = rng.below(left.size() - 1);
    if (j >= i) ++j;
    return {left[i], left[j]};
  }
  const auto right = g_->neighbors(p, path.types[2]);
  const NodeId v = left[rng.below(left.size())];
  const NodeId c = right[rng.below(right.size())];
  return {v, c};
}

const SamplerSet::NegativeSampler& SamplerSet::negative_sampler(NodeType type) const {
  const NegativeSampler& ns = negative_[index_of(type)];
  if (g_->nodes_of_type(type).size() < 2 || !ns.ready) {
    throw ConfigError("negative sampling needs at least two " + std::string(type_tag(type)) +
                      " nodes");
  }
  return ns;
}

double SamplerSet::negative_weight(NodeId id) const {
  const auto nodes = g_->nodes_of_type(g_->type(id));
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
  return negative_[index_of(g_->type(id))].weights[static_cast<std::size_t>(it - nodes.begin())];
}

void SamplerSet::sample_negatives(NodeType type, NodeId exclude, std::size_t m, Rng& rng,
                                  std::vector<NodeId>& out) const {
  const NegativeSampler& ns = negative_sampler(type);
  const auto nodes = g_->nodes_of_type(type);
  double excluded_weight = 0;
  if (g_->type(exclude) == type) excluded_weight = negative_weight(exclude);
  if (excluded_weight >= ns.table.total_weight() * (1 - 1e-12)) {
    throw ConfigError("no " + std::string(type_tag(type)) +
                      " node other than the excluded one has positive weight");
  }
  out.clear();
  out.reserve(m);
  while (out.size() < m) {
    const NodeId u = nodes[ns.table.sample(rng)];
    if (u != exclude) out.push_back(u);
  }
}

bool SamplerSet::sample_negatives_excluding(NodeType type, std::span<const NodeId> excluded,
                                            std::size_t m, Rng& rng,
                                            std::vector<NodeId>& out) const {
  const NegativeSampler& ns = negative_sampler(type);
  const auto nodes = g_->nodes_of_type(type);
  out.clear();
  double excluded_weight = 0;
  for (NodeId e : excluded) {
    if (g_->type(e) == type) excluded_weight += negative_weight(e);
  }
  if (excluded_weight >= ns.table.total_weight() * (1 - 1e-12)) return false;
  out.reserve(m);
  while (out.size() < m) {
    const NodeId u = nodes[ns.table.sample(rng)];
    if (!std::binary_search(excluded.begin(), excluded.end(), u)) out.push_back(u);
  }
  return true;
}

}  // namespace hinrank
