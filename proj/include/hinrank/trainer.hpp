// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hinrank/config.hpp"
#include "hinrank/embedding.hpp"
#include "hinrank/hin.hpp"
#include "hinrank/sampling.hpp"

namespace hinrank {

struct TrainConfig {
  double omega = 0.8;     // P(unsupervised branch) per step
  double margin = 1.0;    // hinge margin
  double lambda = 1e-4;   // L2 weight, applied as (1 - lr*lambda) decay
  std::size_t sup_negatives = 100;
  std::size_t unsup_negatives = 5;
  std::size_t batch = 500;
  std::size_t dim = 128;
  double lr0 = 0.025;
  std::size_t epochs = 60;
  std::uint64_t seed = 1;
  double alpha = 1.0;  // negative-sampling degree exponent
  SchemaSelection selection = SchemaSelection::uniform;
  /// Metapaths added to the simple links; default lab-diag, symp-diag,
  /// lab-symp, lab-pres.
  std::vector<std::string> schemas = {"lab-diag", "symp-diag", "lab-symp", "lab-pres"};
  /// Treatment types taking part in unsupervised sampling.
  std::vector<EventType> treatment = {EventType::diagnosis, EventType::prescription,
                                      EventType::procedure};
  bool simple_links = true;
  bool deterministic = true;
  int threads = 0;  // parallel mode only; 0 = OpenMP default
  std::size_t log_every = 0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  /// Keys: omega, margin, lambda, negatives, unsup_negatives, batch, dim,
  /// lr0, epochs, seed, alpha, schema_selection (uniform|proportional),
  /// schemas (comma list or "none"), treatment (comma list, "all" or
  /// "none"), simple_links, deterministic, threads, log_every.
  static TrainConfig from_config(const KeyValueConfig& cfg, TrainConfig base);
  static TrainConfig from_config(const KeyValueConfig& cfg) { return from_config(cfg, TrainConfig{}); }
  KeyValueConfig to_config() const;
};

std::vector<EventType> parse_treatment_list(std::string_view text);

/// Simple links over diagnostic types plus the selected treatment types,
/// followed by the configured metapaths whose endpoints are all included.
/// Metapaths dropped for touching an excluded type are reported in `dropped`.
std::vector<PathSchema> active_schemas(const TrainConfig& cfg, std::vector<std::string>* dropped = nullptr);

/// f(p) = sum_t w_t * mean_{n in N_t(p)} f(n) over diagnostic types.
/// Throws UndefinedPatientError when p has no diagnostic neighbors.
void compose_from_graph(const EmbeddingModel& model, const HeteroGraph& g, NodeId p,
                        std::span<double> out);

/// s(d, p) = f(d) . f(p).
double sup_score(const EmbeddingModel& model, const HeteroGraph& g, NodeId p, NodeId d);

inline double hinge_loss(double s_pos, double s_neg, double margin) {
  const double v = s_neg - s_pos + margin;
  return v > 0 ? v : 0.0;
}

/// Sum of hinge losses of (p, d_pos, d_neg) over the negatives.
double sup_loss(const EmbeddingModel& model, const HeteroGraph& g, NodeId p, NodeId d_pos,
                std::span<const NodeId> d_negs, double margin);

/// One subgradient step on sup_loss for f(d_pos), each violated f(d_neg),
/// every diagnostic neighbor of p, and the type weights. Gradients are taken
/// at the pre-step parameters. Returns the pre-step loss.
double sup_step(EmbeddingModel& model, const HeteroGraph& g, NodeId p, NodeId d_pos,
                std::span<const NodeId> d_negs, double lr, double margin);

struct TrainStats {
  std::uint64_t steps = 0;
  std::uint64_t unsup_steps = 0;
  std::uint64_t sup_steps = 0;
  std::uint64_t positive_draws = 0;
  std::uint64_t unsup_samples = 0;
  std::uint64_t sup_samples = 0;
  double last_unsup_loss = 0;  // mean per sample, last unsupervised step
  double last_sup_loss = 0;    // mean per sample, last supervised step
};

struct TrainResult {
  EmbeddingModel model;
  TrainStats stats;
  std::vector<std::string> notices;
};

/// Joint training: each step draws the unsupervised branch with
/// probability omega, otherwise the supervised branch, and runs one
/// mini-batch of that branch. The learning rate decays linearly from lr0 to
/// lr0/100 over epochs * ceil(patients / batch) steps.
TrainResult train(const HeteroGraph& g, const TrainConfig& cfg, std::ostream* log = nullptr);

/// Supervised training pool: patients with at least one diagnostic and one
/// diagnosis neighbor, with their diagnoses sorted for rejection sampling.
struct SupervisedPool {
  std::vector<NodeId> patients;
  std::vector<std::vector<NodeId>> diagnoses;  // parallel to patients, sorted

  static SupervisedPool build(const HeteroGraph& g);
};

}  // namespace hinrank
