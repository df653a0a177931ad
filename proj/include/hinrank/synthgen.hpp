// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hinrank/cohort.hpp"
#include "hinrank/config.hpp"
#include "hinrank/ingest.hpp"

namespace hinrank {

/// Planted-cluster EHR generator. Cluster k owns a contiguous block of each
/// vocabulary, and its diagnosis codes lie inside cohort k of the cohort
/// table. Every emitted event comes from one of the patient's clusters with
/// probability beta, otherwise uniformly from the whole vocabulary.
/// Demographics are independent of the clusters.
struct SynthSpec {
  std::size_t patients = 5000;
  std::size_t clusters = 20;
  double beta = 0.9;

  std::size_t symptom_vocab = 200;
  std::size_t lab_vocab = 150;
  std::size_t micro_vocab = 40;
  std::size_t prescription_vocab = 200;
  std::size_t procedure_vocab = 100;
  std::size_t diagnosis_vocab = 100;

  // Draws per patient (duplicates collapse at ingestion).
  std::size_t symptoms_per_patient = 5;
  std::size_t labs_per_patient = 6;
  std::size_t micro_per_patient = 1;
  std::size_t prescriptions_per_patient = 5;
  std::size_t procedures_per_patient = 2;
  std::size_t diagnoses_per_patient = 3;

  std::size_t clusters_per_patient = 1;
  std::uint64_t seed = 1;

  /// Throws ConfigError if the spec cannot be realized (e.g. more clusters
  /// than cohorts, or a vocabulary smaller than the cluster count).
  void validate(const CohortTable& table) const;

  static SynthSpec from_config(const KeyValueConfig& cfg, SynthSpec base);
  static SynthSpec from_config(const KeyValueConfig& cfg) { return from_config(cfg, SynthSpec{}); }
  KeyValueConfig to_config() const;
};

struct SynthData {
  std::vector<PatientStay> stays;
  std::vector<std::vector<std::size_t>> clusters;  // per stay; first is primary
  std::vector<std::string> cluster_cohort;         // cohort label per cluster
};

SynthData generate(const SynthSpec& spec, const CohortTable& table = CohortTable::standard());

/// Writes the standard input tables (see TableSpec::standard) and
/// truth.csv (stay_id, cluster, cohort) for the primary cluster.
void write_tables(const std::filesystem::path& directory, const SynthData& data);

}  // namespace hinrank
