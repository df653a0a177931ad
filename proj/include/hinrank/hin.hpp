// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hinrank/ehr_model.hpp"
#include "hinrank/ingest.hpp"

namespace hinrank {

using NodeId = std::uint32_t;

/// Unordered pair of node types, stored with first <= second.
struct LinkType {
  NodeType first;
  NodeType second;

  static LinkType of(NodeType a, NodeType b) {
    return index_of(a) <= index_of(b) ? LinkType{a, b} : LinkType{b, a};
  }
  friend bool operator==(const LinkType&, const LinkType&) = default;
};

class NetworkSchema {
 public:
  NetworkSchema(std::vector<NodeType> node_types, std::vector<LinkType> links);

  /// Patient hub linked to all nine event types.
  static NetworkSchema standard();

  bool has_type(NodeType t) const;
  bool allows(NodeType a, NodeType b) const;
  const std::vector<NodeType>& node_types() const { return node_types_; }
  const std::vector<LinkType>& links() const { return links_; }

 private:
  std::vector<NodeType> node_types_;
  std::vector<LinkType> links_;
};

/// Type sequence of a simple link (length 2) or a patient-centred metapath
/// (length 3, patient in the middle).
struct PathSchema {
  std::vector<NodeType> types;
  std::string label;

  /// "pati-lab" is a simple link; "lab-diag" expands to lab-pati-diag;
  /// the explicit form "lab-pati-diag" is also accepted.
  static PathSchema parse(std::string_view label);

  bool is_metapath() const { return types.size() == 3; }
  NodeType source() const { return types.front(); }
  NodeType destination() const { return types.back(); }
};

/// The nine patient-event links.
std::vector<PathSchema> simple_link_schemas();
/// The nine candidate metapaths, in the order they are usually listed.
std::vector<PathSchema> candidate_metapaths();
/// lab-diag, symp-diag, lab-symp, lab-pres.
std::vector<PathSchema> default_metapaths();

/// Throws ConfigError if the schema's shape or links are not allowed.
void validate(const PathSchema& path, const NetworkSchema& schema);

/// Typed bipartite graph: patient nodes linked to event nodes. Immutable
/// after construction; adjacency is symmetric, binary, and grouped by type.
class HeteroGraph {
 public:
  /// One patient node per stay, one node per distinct NodeKey, one edge per
  /// distinct (patient, event-node) pair. Ids are assigned in first-seen
  /// order. Events that fail their mapping rule are skipped; an event type
  /// outside the schema throws ConfigError.
  static HeteroGraph build(std::span<const PatientStay> stays,
                           const NetworkSchema& schema = NetworkSchema::standard(),
                           const MappingOptions& options = {});

  std::size_t node_count() const { return keys_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t edge_count(LinkType link) const;

  NodeType type(NodeId id) const { return keys_[id].type; }
  const NodeKey& key(NodeId id) const { return keys_[id]; }
  std::optional<NodeId> find(const NodeKey& key) const;

  /// Neighbors of one type, ascending by id.
  std::span<const NodeId> neighbors(NodeId id, NodeType t) const;
  std::size_t degree(NodeId id) const;
  std::span<const NodeId> nodes_of_type(NodeType t) const { return by_type_[index_of(t)]; }

  const NetworkSchema& schema() const { return schema_; }
  std::size_t skipped_events() const { return skipped_events_; }

  /// Line format:
  ///   hin-graph 1
  ///   nodes <n>
  ///   <id> <tag> <identity>      (tab-separated)
  ///   edges <m>
  ///   <patient id> <node id>     (tab-separated)
  void dump(std::ostream& out) const;
  static HeteroGraph load(std::istream& in);

 private:
  explicit HeteroGraph(NetworkSchema schema) : schema_(std::move(schema)) {}

  NodeId intern(const NodeKey& key);
  void finalize(const std::vector<std::vector<NodeId>>& adjacency);

  NetworkSchema schema_;
  std::vector<NodeKey> keys_;
  std::unordered_map<NodeKey, NodeId, NodeKeyHash> index_;
  // CSR: neighbors of node v with type t live in
  // adj_[offsets_[v * kNodeTypeCount + t] .. offsets_[v * kNodeTypeCount + t + 1]).
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adj_;
  std::vector<std::vector<NodeId>> by_type_ = std::vector<std::vector<NodeId>>(kNodeTypeCount);
  std::size_t edge_count_ = 0;
  std::size_t skipped_events_ = 0;
};

/// Number of path instances: edge count for a simple link; for a-pati-b the
/// sum over patients of |N_a(p)|*|N_b(p)|, or |N_a(p)|*(|N_a(p)|-1)/2 when
/// a == b (unordered distinct pairs).
std::uint64_t count_path_instances(const HeteroGraph& g, const PathSchema& path);

struct PathPair {
  NodeId source;
  NodeId destination;
  std::uint64_t multiplicity;

  friend bool operator==(const PathPair&, const PathPair&) = default;
};

/// Endpoint pairs with the number of path instances joining them, sorted by
/// (source, destination). For a == b metapaths pairs are unordered and
/// reported with source < destination.
std::vector<PathPair> enumerate_path_pairs(const HeteroGraph& g, const PathSchema& path);

}  // namespace hinrank
