// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hinrank/hin.hpp"
#include "hinrank/rng.hpp"

namespace hinrank {

/// Vose alias table: O(1) draws from a fixed categorical distribution.
class AliasTable {
 public:
  AliasTable() = default;
  /// Weights must be finite, non-negative, and not all zero.
  explicit AliasTable(std::span<const double> weights);

  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return prob_.size(); }
  double total_weight() const { return total_; }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
  double total_ = 0;
};

enum class SchemaSelection { uniform, proportional };

/// Uniform draw of an index into a non-empty schema list.
std::size_t sample_schema(std::span<const PathSchema> active, Rng& rng);

/// Positive-pair and negative samplers for one graph. The tables are
/// read-only after construction and can be shared across threads; each
/// thread brings its own Rng.
class SamplerSet {
 public:
  /// Schemas with no path instances, or whose destination type has fewer
  /// than two nodes, are deactivated and listed in notices().
  SamplerSet(const HeteroGraph& g, const std::vector<PathSchema>& schemas, double alpha = 1.0,
             SchemaSelection selection = SchemaSelection::uniform);

  const HeteroGraph& graph() const { return *g_; }
  const std::vector<PathSchema>& schemas() const { return schemas_; }
  const std::vector<std::string>& notices() const { return notices_; }
  double alpha() const { return alpha_; }

  std::size_t sample_schema(Rng& rng) const;

  /// (v, c) drawn with probability multiplicity(v, c) / instance count.
  /// For a-pati-b: patient drawn by |N_a(p)|*|N_b(p)|, then uniform endpoints.
  std::pair<NodeId, NodeId> sample_positive_pair(std::size_t schema, Rng& rng) const;

  /// m draws over nodes of `type` with P(u) proportional to degree(u)^alpha;
  /// draws equal to `exclude` are redrawn. Throws ConfigError when the type
  /// has fewer than two nodes or no other node has positive weight.
  void sample_negatives(NodeType type, NodeId exclude, std::size_t m, Rng& rng,
                        std::vector<NodeId>& out) const;

  /// Same, rejecting every node in `excluded` (sorted ascending). Returns
  /// false and leaves `out` empty if the excluded nodes carry all the weight.
  bool sample_negatives_excluding(NodeType type, std::span<const NodeId> excluded, std::size_t m,
                                  Rng& rng, std::vector<NodeId>& out) const;

  /// Number of positive-pair draws so far (instrumentation).
  std::uint64_t positive_draws() const { return positive_draws_.load(std::memory_order_relaxed); }

  double negative_weight(NodeId id) const;

 private:
  struct PositiveSampler {
    AliasTable patients;          // over patient_ids
    std::vector<NodeId> patient_ids;
  };
  struct NegativeSampler {
    AliasTable table;             // over node ids of the type
    std::vector<double> weights;
    bool ready = false;
  };

  const NegativeSampler& negative_sampler(NodeType type) const;

  const HeteroGraph* g_;
  std::vector<PathSchema> schemas_;
  std::vector<PositiveSampler> positive_;
  AliasTable schema_table_;
  SchemaSelection selection_;
  double alpha_;
  std::vector<NegativeSampler> negative_;  // indexed by node type
  std::vector<std::string> notices_;
  mutable std::atomic<std::uint64_t> positive_draws_{0};
};

}  // namespace hinrank
