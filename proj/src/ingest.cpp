// SPDX-License-Identifier: Apache-2.0
#include "hinrank/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "hinrank/errors.hpp"
#include "hinrank/rng.hpp"

namespace hinrank {

TableSpec TableSpec::standard() {
  TableSpec spec;
  auto add = [&](std::string name, std::string file, EventType type, std::string name_col,
                 std::string value_col) {
    TableSource src;
    src.name = std::move(name);
    src.file = std::move(file);
    src.type = type;
    src.name_column = std::move(name_col);
    src.value_column = std::move(value_col);
    spec.sources.push_back(std::move(src));
  };
  add("gender", "patients.csv", EventType::gender, "gender", "");
  add("ethnicity", "patients.csv", EventType::ethnicity, "ethnicity", "");
  add("age", "patients.csv", EventType::age, "", "age");
  add("labevents", "labevents.csv", EventType::laboratory, "itemid", "flag");
  add("microbiologyevents", "microbiologyevents.csv", EventType::microbiology, "spec_itemid",
      "interpretation");
  add("symptoms", "symptoms.csv", EventType::symptom, "symptom", "");
  add("prescriptions", "prescriptions.csv", EventType::prescription, "generic_drug_name", "");
  add("procedures_icd", "procedures_icd.csv", EventType::procedure, "icd9_code", "");
  add("diagnoses_icd", "diagnoses_icd.csv", EventType::diagnosis, "icd9_code", "");
  return spec;
}

TableSpec TableSpec::from_config(const KeyValueConfig& cfg) {
  TableSpec spec;
  const std::string delim = cfg.get_string("delimiter", ",");
  if (delim == "tab" || delim == "\\t") {
    spec.delimiter = '\t';
  } else if (delim.size() == 1) {
    spec.delimiter = delim[0];
  } else {
    throw ConfigError("delimiter must be a single character or 'tab'");
  }
  spec.missing_lab_flag = cfg.get_string("missing_lab_flag", "normal");

  // Sections keep first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, TableSource> sections;
  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("table.", 0) != 0) continue;
    const auto dot = key.rfind('.');
    if (dot <= 6) throw ConfigError("malformed table key '" + key + "'");
    const std::string section = key.substr(6, dot - 6);
    const std::string field = key.substr(dot + 1);
    auto [it, inserted] = sections.try_emplace(section);
    if (inserted) {
      order.push_back(section);
      it->second.name = section;
    }
    TableSource& src = it->second;
    if (field == "file") {
      src.file = value;
    } else if (field == "type") {
      auto t = parse_event_type(value);
      if (!t) throw ConfigError("table '" + section + "': unknown event type '" + value + "'");
      src.type = *t;
    } else if (field == "stay") {
      src.stay_column = value;
    } else if (field == "name") {
      src.name_column = value;
    } else if (field == "value") {
      src.value_column = value;
    } else {
      throw ConfigError("table '" + section + "': unknown field '" + field + "'");
    }
  }
  for (const auto& section : order) {
    TableSource src = sections.at(section);
    if (src.file.empty()) throw ConfigError("table '" + section + "' has no file");
    if (!cfg.contains("table." + section + ".type")) {
      throw ConfigError("table '" + section + "' has no type");
    }
    spec.sources.push_back(std::move(src));
  }
  if (spec.sources.empty()) throw ConfigError("table spec declares no tables");
  return spec;
}

TableSpec TableSpec::load(const std::filesystem::path& path) {
  return from_config(KeyValueConfig::load(path));
}

void TableSpec::write(std::ostream& out) const {
  out << "delimiter = " << (delimiter == '\t' ? std::string("tab") : std::string(1, delimiter))
      << '\n';
  out << "missing_lab_flag = " << missing_lab_flag << '\n';
  for (const auto& src : sources) {
    const std::string prefix = "table." + src.name + ".";
    out << prefix << "file = " << src.file << '\n';
    out << prefix << "type = " << type_tag(src.type) << '\n';
    out << prefix << "stay = " << src.stay_column << '\n';
    if (!src.name_column.empty()) out << prefix << "name = " << src.name_column << '\n';
    if (!src.value_column.empty()) out << prefix << "value = " << src.value_column << '\n';
  }
}

bool split_delimited(std::string_view line, char delimiter, std::vector<std::string>& fields) {
  fields.clear();
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"' && current.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (quoted) return false;
  fields.push_back(std::move(current));
  return true;
}

namespace {

struct StayBuilder {
  PatientStay stay;
  std::unordered_set<NodeKey, NodeKeyHash> seen;
  bool excluded = false;
};

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& column,
                         const TableSource& src) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == column) return i;
  }
  throw DataError("table '" + src.name + "' (" + src.file + "): missing column '" + column + "'");
}

}  // namespace

LoadResult load_tables(const std::filesystem::path& directory, const TableSpec& spec) {
  LoadResult result;
  LoadReport& report = result.report;
  std::vector<StayBuilder> builders;
  std::unordered_map<std::string, std::size_t> index;
  MappingOptions options;
  options.missing_lab_flag = spec.missing_lab_flag;

  for (const auto& src : spec.sources) {
    const auto path = directory / src.file;
    std::ifstream in(path);
    if (!in) throw DataError("missing table file: " + path.string());

    std::string line;
    std::vector<std::string> fields;
    if (!std::getline(in, line)) continue;  // empty file: no rows
    strip_cr(line);
    if (!split_delimited(line, spec.delimiter, fields)) {
      throw DataError("unreadable header in " + path.string());
    }
    const std::vector<std::string> header = fields;
    const std::size_t stay_col = column_index(header, src.stay_column, src);
    const std::size_t name_col =
        src.name_column.empty() ? header.size() : column_index(header, src.name_column, src);
    const std::size_t value_col =
        src.value_column.empty() ? header.size() : column_index(header, src.value_column, src);

    while (std::getline(in, line)) {
      strip_cr(line);
      if (trim(line).empty()) continue;
      ++report.rows_read;
      if (!split_delimited(line, spec.delimiter, fields) || fields.size() != header.size()) {
        ++report.rows_malformed;
        continue;
      }
      const std::string stay_id(trim(fields[stay_col]));
      if (stay_id.empty()) {
        ++report.rows_malformed;
        continue;
      }
      auto [it, inserted] = index.try_emplace(stay_id, builders.size());
      if (inserted) {
        builders.emplace_back();
        builders.back().stay.stay_id = stay_id;
      }
      StayBuilder& b = builders[it->second];

      ClinicalEvent event{src.type,
                          name_col < header.size() ? fields[name_col]
                                                   : std::string(type_tag(src.type)),
                          std::nullopt};
      if (value_col < header.size() && !trim(fields[value_col]).empty()) {
        event.value = fields[value_col];
      }
      try {
        NodeKey key = map_event(event, options);
        if (!b.seen.insert(std::move(key)).second) {
          ++report.rows_duplicate;
          continue;
        }
        b.stay.events.push_back(std::move(event));
        ++report.rows_accepted;
      } catch (const ExcludedSample&) {
        b.excluded = true;
        ++report.rows_excluded;
      } catch (const RejectedRecord&) {
        ++report.rows_rejected;
      }
    }
  }

  for (auto& b : builders) {
    if (b.excluded) {
      ++report.stays_excluded;
      report.rows_accepted -= b.stay.events.size();
      report.rows_excluded += b.stay.events.size();
      continue;
    }
    result.stays.push_back(std::move(b.stay));
  }
  return result;
}

Split split(std::vector<PatientStay> stays, double test_fraction, std::uint64_t seed) {
  if (stays.size() < 2) throw ConfigError("split needs at least two stays");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  const std::size_t n = stays.size();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));

  // Partial Fisher-Yates: the first n_test slots of `order` are the test set.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(order[i], order[j]);
  }
  std::vector<char> is_test(n, 0);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = 1;

  Split out;
  out.test.reserve(n_test);
  out.train.reserve(n - n_test);
  for (std::size_t i = 0; i < n; ++i) {
    (is_test[i] ? out.test : out.train).push_back(std::move(stays[i]));
  }
  return out;
}

void write_events(std::ostream& out, const std::vector<PatientStay>& stays) {
  out << "stay_id\ttype\tname\tvalue\n";
  for (const auto& stay : stays) {
    if (stay.events.empty()) {
      out << stay.stay_id << "\t-\t\t\n";
      continue;
    }
    for (const auto& e : stay.events) {
      out << stay.stay_id << '\t' << type_tag(e.type) << '\t' << e.name << '\t'
          << e.value.value_or("") << '\n';
    }
  }
}

std::vector<PatientStay> read_events(std::istream& in) {
  std::vector<PatientStay> stays;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line_no == 1 && line.rfind("stay_id\t", 0) == 0) continue;
    if (trim(line).empty()) continue;
    fields.clear();
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 4 || fields[0].empty()) {
      throw DataError("events line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    auto [it, inserted] = index.try_emplace(fields[0], stays.size());
    if (inserted) stays.push_back(PatientStay{fields[0], {}});
    if (fields[1] == "-") continue;
    auto type = parse_event_type(fields[1]);
    if (!type) {
      throw DataError("events line " + std::to_string(line_no) + ": unknown event type '" +
                      fields[1] + "'");
    }
    ClinicalEvent e{*type, fields.size() > 2 ? fields[2] : std::string(), std::nullopt};
    if (fields.size() > 3 && !fields[3].empty()) e.value = fields[3];
    stays[it->second].events.push_back(std::move(e));
  }
  return stays;
}

void write_events_file(const std::filesystem::path& path, const std::vector<PatientStay>& stays) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_events(out, stays);
}

std::vector<PatientStay> read_events_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing events file: " + path.string());
  return read_events(in);
}

}  // namespace hinrank
