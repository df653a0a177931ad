// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hinrank/ehr_model.hpp"
#include "hinrank/hin.hpp"

namespace hinrank {

/// Node embedding table plus one scalar weight per diagnostic event type.
///
/// Vectors are stored row-major in a single buffer. The model optionally
/// carries the node vocabulary (keys) so that it can score patients built
/// from raw events without the training graph.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;

  /// Coordinates i.i.d. uniform in [-0.5/dim, 0.5/dim]; type weights
  /// 1/|DIAGNOSTIC|. No vocabulary attached.
  static EmbeddingModel init(std::size_t node_count, std::size_t dim, std::uint64_t seed);
  /// init() sized to the graph, with the graph's node keys as vocabulary.
  static EmbeddingModel for_graph(const HeteroGraph& g, std::size_t dim, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  std::size_t node_count() const { return node_count_; }

  std::span<double> vec(NodeId id) { return {data_.data() + std::size_t{id} * dim_, dim_}; }
  std::span<const double> vec(NodeId id) const {
    return {data_.data() + std::size_t{id} * dim_, dim_};
  }

  double type_weight(EventType t) const;
  void set_type_weight(EventType t, double w);
  std::array<double, kDiagnosticTypeCount>& type_weights() { return weights_; }
  const std::array<double, kDiagnosticTypeCount>& type_weights() const { return weights_; }

  bool has_vocabulary() const { return !keys_.empty(); }
  const std::vector<NodeKey>& keys() const { return keys_; }
  std::optional<NodeId> find(const NodeKey& key) const;
  NodeType node_type(NodeId id) const { return keys_[id].type; }
  /// Ids of all nodes of one type, ascending.
  std::vector<NodeId> nodes_of_type(NodeType t) const;
  void set_vocabulary(std::vector<NodeKey> keys);

  // Text form:
  //   hinrank-model 1
  //   dim <d>
  //   nodes <n>
  //   weights lab=<w> symp=<w> age=<w> gen=<w> eth=<w> micro=<w>
  //   <id>\t<tag>\t<identity>\t<x_0> ... <x_{d-1}>
  // Reals use 17 significant digits, so load(save(m)) reproduces m exactly.
  void save_text(std::ostream& out) const;
  static EmbeddingModel load_text(std::istream& in);
  void save_binary(std::ostream& out) const;
  static EmbeddingModel load_binary(std::istream& in);

  void save(const std::filesystem::path& path, bool binary = false) const;
  /// Detects the binary magic, otherwise reads text.
  static EmbeddingModel load(const std::filesystem::path& path);

  friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
    return a.dim_ == b.dim_ && a.node_count_ == b.node_count_ && a.data_ == b.data_ &&
           a.weights_ == b.weights_ && a.keys_ == b.keys_;
  }

 private:
  std::size_t dim_ = 0;
  std::size_t node_count_ = 0;
  std::vector<double> data_;
  std::array<double, kDiagnosticTypeCount> weights_{};
  std::vector<NodeKey> keys_;
  std::unordered_map<NodeKey, NodeId, NodeKeyHash> index_;
};

inline constexpr double kSigmoidClamp = 40.0;
inline constexpr double kProbabilityFloor = 1e-12;

double dot(std::span<const double> a, std::span<const double> b);

/// Logistic function with the argument clamped to [-40, 40].
double sigmoid(double x);

/// -log(sigma(x)) with sigma kept inside [1e-12, 1 - 1e-12].
double neg_log_sigmoid(double x);

/// L = -log s(f(c).f(v)) - sum_l log s(-f(u_l).f(v)).
double unsup_loss(const EmbeddingModel& model, NodeId v, NodeId c,
                  std::span<const NodeId> negatives);

/// One gradient-descent step on unsup_loss for f(v), f(c) and every f(u_l).
/// All gradients are taken at the pre-step vectors, so repeated or aliased
/// ids receive the exact summed gradient. Returns the pre-step loss.
double unsup_step(EmbeddingModel& model, NodeId v, NodeId c, std::span<const NodeId> negatives,
                  double lr);

}  // namespace hinrank
