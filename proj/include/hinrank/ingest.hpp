// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hinrank/config.hpp"
#include "hinrank/ehr_model.hpp"

namespace hinrank {

/// One patient stay: the unit of prediction. Event lists may lack any type.
struct PatientStay {
  std::string stay_id;
  std::vector<ClinicalEvent> events;
};

/// Binds one delimited file to one event type and its column roles.
/// A file may appear in several sources (e.g. patients.csv feeds gender,
/// ethnicity and age).
struct TableSource {
  std::string name;  // section name in the spec file
  std::string file;
  EventType type = EventType::symptom;
  std::string stay_column = "stay_id";
  std::string name_column;   // empty: event name is the type tag
  std::string value_column;  // empty: no value payload
};

/// Key-value description of the input tables:
///
///   delimiter = ,
///   missing_lab_flag = normal
///   table.labevents.file = labevents.csv
///   table.labevents.type = lab
///   table.labevents.stay = stay_id
///   table.labevents.name = itemid
///   table.labevents.value = flag
struct TableSpec {
  std::vector<TableSource> sources;
  char delimiter = ',';
  std::string missing_lab_flag = "normal";

  /// Layout written by the synthetic generator.
  static TableSpec standard();
  static TableSpec load(const std::filesystem::path& path);
  static TableSpec from_config(const KeyValueConfig& cfg);
  void write(std::ostream& out) const;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_accepted = 0;   // equals the total event count across stays
  std::size_t rows_rejected = 0;   // failed a mapping rule
  std::size_t rows_malformed = 0;  // wrong field count or broken quoting
  std::size_t rows_duplicate = 0;  // same node already recorded for the stay
  std::size_t rows_excluded = 0;   // belonged to an excluded stay
  std::size_t stays_excluded = 0;
};

struct LoadResult {
  std::vector<PatientStay> stays;
  LoadReport report;
};

/// Reads every declared table from `directory`. Missing files or columns
/// throw DataError; bad rows are counted in the report. Stays appear in
/// first-seen order; within a stay, events keep file order and duplicates
/// (same node key) are collapsed.
LoadResult load_tables(const std::filesystem::path& directory, const TableSpec& spec);

struct Split {
  std::vector<PatientStay> train;
  std::vector<PatientStay> test;
};

/// Random partition with |test| = round(test_fraction * N). Both halves keep
/// the input order. Throws ConfigError for fewer than two stays or a fraction
/// outside (0, 1).
Split split(std::vector<PatientStay> stays, double test_fraction, std::uint64_t seed);

/// Splits one delimited line, honoring double-quoted fields. Returns false
/// on an unterminated quote.
bool split_delimited(std::string_view line, char delimiter, std::vector<std::string>& fields);

// Dataset artifact: tab-separated "stay_id  type  name  value" with a header
// row. Stays are contiguous and appear in order. A stay with no events is
// written as a single row with type "-".
void write_events(std::ostream& out, const std::vector<PatientStay>& stays);
std::vector<PatientStay> read_events(std::istream& in);
void write_events_file(const std::filesystem::path& path, const std::vector<PatientStay>& stays);
std::vector<PatientStay> read_events_file(const std::filesystem::path& path);

}  // namespace hinrank
