// SPDX-License-Identifier: Apache-2.0
#include "hinrank/cohort.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hinrank/config.hpp"
#include "hinrank/ehr_model.hpp"
#include "hinrank/errors.hpp"

namespace hinrank {

namespace {

// Category digits per family: numeric "428" -> 3, "V45" -> 2, "E880" -> 3.
std::optional<std::pair<char, int>> parse_category(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  char family = '0';
  std::size_t digits_needed = 3;
  const char lead = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  if (lead == 'V') {
    family = 'V';
    digits_needed = 2;
    text.remove_prefix(1);
  } else if (lead == 'E') {
    family = 'E';
    text.remove_prefix(1);
  }
  int value = 0;
  std::size_t used = 0;
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    if (used < digits_needed) value = value * 10 + (c - '0');
    ++used;
  }
  if (used < digits_needed) return std::nullopt;
  return std::make_pair(family, value);
}

std::string format_bound(char family, int value) {
  std::ostringstream os;
  if (family != '0') os << family;
  const int width = family == 'V' ? 2 : 3;
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  os << digits;
  return os.str();
}

}  // namespace

std::optional<std::pair<char, int>> icd9_category(std::string_view code) {
  if (!is_icd9_code(trim(code))) return std::nullopt;
  return parse_category(code);
}

CohortTable::CohortTable(std::vector<Cohort> cohorts) : cohorts_(std::move(cohorts)) {
  for (std::size_t i = 0; i < cohorts_.size(); ++i) {
    for (std::size_t j = i; j < cohorts_.size(); ++j) {
      for (std::size_t a = 0; a < cohorts_[i].ranges.size(); ++a) {
        for (std::size_t b = (i == j ? a + 1 : 0); b < cohorts_[j].ranges.size(); ++b) {
          if (cohorts_[i].ranges[a].overlaps(cohorts_[j].ranges[b])) {
            throw ConfigError("cohort ranges overlap: '" + cohorts_[i].label + "' and '" +
                              cohorts_[j].label + "'");
          }
        }
      }
    }
  }
}

const CohortTable& CohortTable::standard() {
  static const CohortTable table = [] {
    std::istringstream in(
        "infectious and parasitic | 001-139\n"
        "neoplasms | 140-239\n"
        "endocrine nutritional metabolic immunity | 240-279\n"
        "blood organs | 280-289\n"
        "mental disorders | 290-319\n"
        "nervous system and sense organs | 320-389\n"
        "circulatory system | 390-459\n"
        "respiratory system | 460-519\n"
        "digestive system | 520-579\n"
        "genitourinary system | 580-629\n"
        "pregnancy childbirth puerperium | 630-679\n"
        "skin and subcutaneous tissue | 680-709\n"
        "musculoskeletal and connective tissue | 710-739\n"
        "congenital anomalies | 740-759\n"
        "perinatal conditions | 760-779\n"
        "symptoms signs ill-defined conditions | 780-799\n"
        "injury | 800-959\n"
        "poisoning and complications of care | 960-999\n"
        "supplementary factors | V01-V91\n"
        "external causes | E000-E999\n");
    return CohortTable::parse(in);
  }();
  return table;
}

CohortTable CohortTable::parse(std::istream& in) {
  std::vector<Cohort> cohorts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto bar = view.find('|');
    if (bar == std::string_view::npos) {
      throw ConfigError("cohort table line " + std::to_string(line_no) + ": expected 'label | ranges'");
    }
    Cohort cohort;
    cohort.label = std::string(trim(view.substr(0, bar)));
    if (cohort.label.empty()) {
      throw ConfigError("cohort table line " + std::to_string(line_no) + ": empty label");
    }
    for (const auto& item : split_list(view.substr(bar + 1), ',')) {
      const auto dash = item.find('-');
      const std::string lo_text = item.substr(0, dash);
      const std::string hi_text = dash == std::string::npos ? lo_text : item.substr(dash + 1);
      auto lo = parse_category(lo_text);
      auto hi = parse_category(hi_text);
      if (!lo || !hi || lo->first != hi->first || lo->second > hi->second) {
        throw ConfigError("cohort table line " + std::to_string(line_no) + ": bad range '" +
                          item + "'");
      }
      cohort.ranges.push_back({lo->first, lo->second, hi->second});
    }
    if (cohort.ranges.empty()) {
      throw ConfigError("cohort table line " + std::to_string(line_no) + ": no ranges");
    }
    cohorts.push_back(std::move(cohort));
  }
  return CohortTable(std::move(cohorts));
}

CohortTable CohortTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cohort table " + path.string());
  return parse(in);
}

std::optional<std::string> CohortTable::map(std::string_view code) const {
  auto cat = icd9_category(code);
  if (!cat) return std::nullopt;
  for (const auto& cohort : cohorts_) {
    for (const auto& range : cohort.ranges) {
      if (range.contains(cat->first, cat->second)) return cohort.label;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> CohortTable::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < cohorts_.size(); ++i) {
    if (cohorts_[i].label == label) return i;
  }
  return std::nullopt;
}

void CohortTable::write(std::ostream& out) const {
  for (const auto& cohort : cohorts_) {
    out << cohort.label << " |";
    for (std::size_t i = 0; i < cohort.ranges.size(); ++i) {
      const auto& r = cohort.ranges[i];
      out << (i ? ", " : " ") << format_bound(r.family, r.low) << '-'
          << format_bound(r.family, r.high);
    }
    out << '\n';
  }
}

std::optional<std::string> map_cohort(std::string_view code, const CohortTable& table) {
  return table.map(code);
}

}  // namespace hinrank
