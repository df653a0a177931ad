// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hinrank {

/// Inclusive range of 3-digit ICD-9 categories within one code family
/// (numeric, V-codes, or E-codes).
struct CodeRange {
  char family = '0';  // '0' numeric, 'V', or 'E'
  int low = 0;
  int high = 0;

  bool contains(char code_family, int category) const {
    return code_family == family && category >= low && category <= high;
  }
  bool overlaps(const CodeRange& other) const {
    return family == other.family && low <= other.high && other.low <= high;
  }
};

struct Cohort {
  std::string label;
  std::vector<CodeRange> ranges;
};

/// Ordered list of disease groups keyed by ICD-9 category ranges.
///
/// File format, one cohort per line: "label | 390-459, 460-519". Blank lines
/// and '#' comments are ignored. A single category may be written without
/// a dash.
class CohortTable {
 public:
  CohortTable() = default;
  /// Throws ConfigError if any two ranges overlap.
  explicit CohortTable(std::vector<Cohort> cohorts);

  /// The 20-group ICD-9 chapter map shipped as the default.
  static const CohortTable& standard();
  static CohortTable parse(std::istream& in);
  static CohortTable load(const std::filesystem::path& path);

  std::optional<std::string> map(std::string_view code) const;
  const std::vector<Cohort>& cohorts() const { return cohorts_; }
  std::size_t size() const { return cohorts_.size(); }
  std::optional<std::size_t> index_of(std::string_view label) const;

  void write(std::ostream& out) const;

 private:
  std::vector<Cohort> cohorts_;
};

/// Splits a code into (family, category); nullopt if it is not ICD-9 shaped.
std::optional<std::pair<char, int>> icd9_category(std::string_view code);

std::optional<std::string> map_cohort(std::string_view code, const CohortTable& table);

}  // namespace hinrank
