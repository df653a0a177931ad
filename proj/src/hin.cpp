// SPDX-License-Identifier: Apache-2.0
#include "hinrank/hin.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hinrank/config.hpp"
#include "hinrank/errors.hpp"

namespace hinrank {

NetworkSchema::NetworkSchema(std::vector<NodeType> node_types, std::vector<LinkType> links)
    : node_types_(std::move(node_types)), links_(std::move(links)) {
  if (node_types_.size() <= 1 && links_.size() <= 1) {
    throw ConfigError("a heterogeneous network needs more than one node or link type");
  }
  for (const auto& link : links_) {
    if (!has_type(link.first) || !has_type(link.second)) {
      throw ConfigError("link references a node type outside the schema");
    }
  }
}

NetworkSchema NetworkSchema::standard() {
  std::vector<NodeType> types{NodeType::patient};
  std::vector<LinkType> links;
  for (EventType e : kAllEventTypes) {
    types.push_back(to_node_type(e));
    links.push_back(LinkType::of(NodeType::patient, to_node_type(e)));
  }
  return NetworkSchema(std::move(types), std::move(links));
}

bool NetworkSchema::has_type(NodeType t) const {
  return std::find(node_types_.begin(), node_types_.end(), t) != node_types_.end();
}

bool NetworkSchema::allows(NodeType a, NodeType b) const {
  const LinkType link = LinkType::of(a, b);
  return std::find(links_.begin(), links_.end(), link) != links_.end();
}

PathSchema PathSchema::parse(std::string_view label) {
  const auto parts = split_list(label, '-');
  PathSchema out;
  for (const auto& part : parts) {
    auto t = parse_node_type(part);
    if (!t) throw ConfigError("unknown node type '" + part + "' in path '" + std::string(label) + "'");
    out.types.push_back(*t);
  }
  if (out.types.size() == 2 && out.types[0] != NodeType::patient &&
      out.types[1] != NodeType::patient) {
    out.types.insert(out.types.begin() + 1, NodeType::patient);
  }
  if (out.types.size() < 2 || out.types.size() > 3) {
    throw ConfigError("path '" + std::string(label) + "' must have 2 or 3 node types");
  }
  if (out.types.size() == 3 && out.types[1] != NodeType::patient) {
    throw ConfigError("metapath '" + std::string(label) + "' must pass through a patient");
  }
  if (out.types.size() == 3) {
    out.label = std::string(type_tag(out.types[0])) + "-" + std::string(type_tag(out.types[2]));
  } else {
    out.label = std::string(type_tag(out.types[0])) + "-" + std::string(type_tag(out.types[1]));
  }
  return out;
}

std::vector<PathSchema> simple_link_schemas() {
  std::vector<PathSchema> out;
  for (const char* label : {"pati-proc", "pati-pres", "pati-micro", "pati-lab", "pati-age",
                            "pati-diag", "pati-symp", "pati-gen", "pati-eth"}) {
    out.push_back(PathSchema::parse(label));
  }
  return out;
}

std::vector<PathSchema> candidate_metapaths() {
  std::vector<PathSchema> out;
  for (const char* label : {"lab-diag", "symp-diag", "lab-proc", "lab-pres", "symp-pres",
                            "symp-proc", "lab-symp", "micro-lab", "micro-symp"}) {
    out.push_back(PathSchema::parse(label));
  }
  return out;
}

std::vector<PathSchema> default_metapaths() {
  std::vector<PathSchema> out;
  for (const char* label : {"lab-diag", "symp-diag", "lab-symp", "lab-pres"}) {
    out.push_back(PathSchema::parse(label));
  }
  return out;
}

void validate(const PathSchema& path, const NetworkSchema& schema) {
  if (path.types.size() < 2 || path.types.size() > 3) {
    throw ConfigError("path '" + path.label + "' must have 2 or 3 node types");
  }
  if (path.types.size() == 3 && path.types[1] != NodeType::patient) {
    throw ConfigError("metapath '" + path.label + "' must pass through a patient");
  }
  for (std::size_t i = 0; i + 1 < path.types.size(); ++i) {
    if (!schema.allows(path.types[i], path.types[i + 1])) {
      throw ConfigError("path '" + path.label + "' uses a link outside the network schema");
    }
  }
}

NodeId HeteroGraph::intern(const NodeKey& key) {
  auto [it, inserted] = index_.try_emplace(key, static_cast<NodeId>(keys_.size()));
  if (inserted) keys_.push_back(key);
  return it->second;
}

void HeteroGraph::finalize(const std::vector<std::vector<NodeId>>& adjacency) {
  const std::size_t n = keys_.size();
  offsets_.assign(n * kNodeTypeCount + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (NodeId u : adjacency[v]) ++offsets_[v * kNodeTypeCount + index_of(keys_[u].type) + 1];
  }
  for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
  adj_.assign(offsets_.back(), 0);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t v = 0; v < n; ++v) {
    for (NodeId u : adjacency[v]) adj_[cursor[v * kNodeTypeCount + index_of(keys_[u].type)]++] = u;
  }
  // Ascending ids within each (node, type) block.
  for (std::size_t b = 0; b + 1 < offsets_.size(); ++b) {
    std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[b]),
              adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[b + 1]));
  }
  for (auto& list : by_type_) list.clear();
  for (std::size_t v = 0; v < n; ++v) by_type_[index_of(keys_[v].type)].push_back(static_cast<NodeId>(v));
  edge_count_ = adj_.size() / 2;
}

HeteroGraph HeteroGraph::build(std::span<const PatientStay> stays, const NetworkSchema& schema,
                               const MappingOptions& options) {
  if (!schema.has_type(NodeType::patient)) throw ConfigError("network schema has no patient type");
  HeteroGraph g(schema);
  std::vector<std::vector<NodeId>> adjacency;
  for (const auto& stay : stays) {
    const NodeId p = g.intern({NodeType::patient, stay.stay_id});
    if (p != adjacency.size()) throw DataError("duplicate stay id '" + stay.stay_id + "'");
    adjacency.emplace_back();
    for (const auto& event : stay.events) {
      const NodeType t = to_node_type(event.type);
      if (!schema.allows(NodeType::patient, t)) {
        throw ConfigError("event type '" + std::string(type_tag(t)) +
                          "' is not part of the network schema");
      }
      NodeKey key;
      try {
        key = map_event(event, options);
      } catch (const DataError&) {
        ++g.skipped_events_;
        continue;
      }
      const NodeId v = g.intern(key);
      if (v == adjacency.size()) adjacency.emplace_back();
      auto& mine = adjacency[p];
      if (std::find(mine.begin(), mine.end(), v) != mine.end()) continue;
      mine.push_back(v);
      adjacency[v].push_back(p);
    }
  }
  g.finalize(adjacency);
  return g;
}

std::size_t HeteroGraph::edge_count(LinkType link) const {
  std::size_t count = 0;
  for (NodeId v : nodes_of_type(link.first)) count += neighbors(v, link.second).size();
  if (link.first == link.second) count /= 2;
  return count;
}

std::optional<NodeId> HeteroGraph::find(const NodeKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const NodeId> HeteroGraph::neighbors(NodeId id, NodeType t) const {
  const std::size_t slot = static_cast<std::size_t>(id) * kNodeTypeCount + index_of(t);
  return {adj_.data() + offsets_[slot], offsets_[slot + 1] - offsets_[slot]};
}

std::size_t HeteroGraph::degree(NodeId id) const {
  const std::size_t base = static_cast<std::size_t>(id) * kNodeTypeCount;
  return offsets_[base + kNodeTypeCount] - offsets_[base];
}

void HeteroGraph::dump(std::ostream& out) const {
  out << "hin-graph 1\n";
  out << "nodes " << keys_.size() << '\n';
  for (std::size_t v = 0; v < keys_.size(); ++v) {
    out << v << '\t' << type_tag(keys_[v].type) << '\t' << keys_[v].identity << '\n';
  }
  out << "edges " << edge_count_ << '\n';
  for (NodeId p : nodes_of_type(NodeType::patient)) {
    for (std::size_t t = 1; t < kNodeTypeCount; ++t) {
      for (NodeId v : neighbors(p, static_cast<NodeType>(t))) out << p << '\t' << v << '\n';
    }
  }
}

HeteroGraph HeteroGraph::load(std::istream& in) {
  auto fail = [](const std::string& what) -> DataError { return DataError("graph file: " + what); };
  std::string line;
  if (!std::getline(in, line) || line != "hin-graph 1") throw fail("bad header");
  std::size_t n = 0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "nodes %zu", &n) != 1) {
    throw fail("missing node count");
  }
  HeteroGraph g(NetworkSchema::standard());
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw fail("truncated node section");
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) throw fail("bad node line");
    if (std::stoul(line.substr(0, t1)) != i) throw fail("node ids must be dense and ordered");
    auto type = parse_node_type(line.substr(t1 + 1, t2 - t1 - 1));
    if (!type) throw fail("unknown node type");
    if (g.intern({*type, line.substr(t2 + 1)}) != i) throw fail("duplicate node key");
  }
  std::size_t m = 0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "edges %zu", &m) != 1) {
    throw fail("missing edge count");
  }
  std::vector<std::vector<NodeId>> adjacency(n);
  for (std::size_t i = 0; i < m; ++i) {
    unsigned long a = 0, b = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "%lu\t%lu", &a, &b) != 2 || a >= n ||
        b >= n) {
      throw fail("bad edge line");
    }
    if (!g.schema_.allows(g.keys_[a].type, g.keys_[b].type)) throw fail("edge outside schema");
    adjacency[a].push_back(static_cast<NodeId>(b));
    adjacency[b].push_back(static_cast<NodeId>(a));
  }
  g.finalize(adjacency);
  return g;
}

std::uint64_t count_path_instances(const HeteroGraph& g, const PathSchema& path) {
  validate(path, g.schema());
  if (!path.is_metapath()) return g.edge_count(LinkType::of(path.types[0], path.types[1]));
  const NodeType a = path.types[0];
  const NodeType b = path.types[2];
  std::uint64_t total = 0;
  for (NodeId p : g.nodes_of_type(NodeType::patient)) {
    const std::uint64_t na = g.neighbors(p, a).size();
    if (a == b) {
      total += na * (na - (na > 0 ? 1 : 0)) / 2;
    } else {
      total += na * g.neighbors(p, b).size();
    }
  }
  return total;
}

std::vector<PathPair> enumerate_path_pairs(const HeteroGraph& g, const PathSchema& path) {
  validate(path, g.schema());
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> counts;
  if (!path.is_metapath()) {
    const NodeType src = path.types[0];
    const NodeType dst = path.types[1];
    for (NodeId v : g.nodes_of_type(src)) {
      for (NodeId c : g.neighbors(v, dst)) {
        if (src == dst && c < v) continue;
        ++counts[{v, c}];
      }
    }
  } else {
    const NodeType a = path.types[0];
    const NodeType b = path.types[2];
    for (NodeId p : g.nodes_of_type(NodeType::patient)) {
      const auto left = g.neighbors(p, a);
      const auto right = g.neighbors(p, b);
      for (std::size_t i = 0; i < left.size(); ++i) {
        for (std::size_t j = 0; j < right.size(); ++j) {
          if (a == b) {
            if (left[i] >= right[j]) continue;
          }
          ++counts[{left[i], right[j]}];
        }
      }
    }
  }
  std::vector<PathPair> out;
  out.reserve(counts.size());
  for (const auto& [pair, m] : counts) out.push_back({pair.first, pair.second, m});
  return out;
}

}  // namespace hinrank
