// SPDX-License-Identifier: Apache-2.0
#include "hinrank/ehr_model.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "hinrank/errors.hpp"

namespace hinrank {

namespace {

constexpr std::array<std::string_view, kNodeTypeCount> kTags = {
    "pati", "lab", "symp", "age", "gen", "eth", "micro", "pres", "proc", "diag"};

constexpr std::array<std::string_view, kNodeTypeCount> kLongNames = {
    "patient",   "laboratory",   "symptom",      "age",       "gender",
    "ethnicity", "microbiology", "prescription", "procedure", "diagnosis"};

}  // namespace

std::string_view type_tag(NodeType t) { return kTags[index_of(t)]; }
std::string_view type_tag(EventType t) { return type_tag(to_node_type(t)); }

std::optional<NodeType> parse_node_type(std::string_view text) {
  const std::string lowered = to_lower(trim(text));
  for (std::size_t i = 0; i < kNodeTypeCount; ++i) {
    if (lowered == kTags[i] || lowered == kLongNames[i]) return static_cast<NodeType>(i);
  }
  return std::nullopt;
}

std::optional<EventType> parse_event_type(std::string_view text) {
  auto t = parse_node_type(text);
  if (!t) return std::nullopt;
  return to_event_type(*t);
}

std::string NodeKey::str() const {
  std::string out(type_tag(type));
  out += ':';
  out += identity;
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

NodeKey map_lab_event(std::string_view name, std::optional<std::string_view> flag,
                      std::string_view missing_flag) {
  name = trim(name);
  if (name.empty()) throw RejectedRecord("laboratory event with empty name");
  std::string normalized_flag;
  if (flag && !trim(*flag).empty()) {
    normalized_flag = to_lower(trim(*flag));
  } else {
    normalized_flag = to_lower(trim(missing_flag));
  }
  if (normalized_flag != "normal" && normalized_flag != "abnormal") {
    throw RejectedRecord("unrecognized laboratory flag '" + normalized_flag + "'");
  }
  return {NodeType::laboratory, std::string(name) + ":" + normalized_flag};
}

NodeKey map_micro_event(std::string_view name, std::string_view interpretation) {
  name = trim(name);
  if (name.empty()) throw RejectedRecord("microbiology event with empty name");
  const std::string interp = to_lower(trim(interpretation));
  if (interp != "sensitive" && interp != "resistant" && interp != "intermediate") {
    throw RejectedRecord("unrecognized microbiology interpretation '" + interp + "'");
  }
  return {NodeType::microbiology, std::string(name) + ":" + interp};
}

NodeKey map_age(double age_years) {
  if (!std::isfinite(age_years) || age_years < 0) {
    throw RejectedRecord("age must be a finite non-negative number");
  }
  if (age_years < 15) throw ExcludedSample("subject younger than 15 years");
  if (age_years < 30) return {NodeType::age, "age:15-30"};
  if (age_years <= 64) return {NodeType::age, "age:30-64"};
  return {NodeType::age, "age:64+"};
}

bool is_icd9_code(std::string_view code) {
  if (code.size() < 3 || code.size() > 5) return false;
  std::size_t start = 0;
  const char lead = static_cast<char>(std::toupper(static_cast<unsigned char>(code[0])));
  if (lead == 'E' || lead == 'V') start = 1;
  for (std::size_t i = start; i < code.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(code[i]))) return false;
  }
  return code.size() - start >= 2;
}

std::string normalize_icd9(std::string_view code) {
  std::string out(trim(code));
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

NodeKey map_coded_event(EventType type, std::string_view icd9_code) {
  if (type != EventType::procedure && type != EventType::diagnosis) {
    throw RejectedRecord("coded mapping applies to procedure and diagnosis only");
  }
  std::string code = normalize_icd9(icd9_code);
  if (!is_icd9_code(code)) throw RejectedRecord("malformed ICD-9 code '" + code + "'");
  return {to_node_type(type), std::move(code)};
}

NodeKey map_categorical(EventType type, std::string_view name) {
  switch (type) {
    case EventType::gender:
    case EventType::ethnicity:
    case EventType::prescription:
    case EventType::symptom:
      break;
    default:
      throw RejectedRecord("categorical mapping does not apply to type " +
                           std::string(type_tag(type)));
  }
  const std::string_view trimmed = trim(name);
  if (trimmed.empty()) throw RejectedRecord("categorical event with empty name");
  return {to_node_type(type), to_lower(trimmed)};
}

NodeKey map_event(const ClinicalEvent& event, const MappingOptions& options) {
  switch (event.type) {
    case EventType::laboratory: {
      std::optional<std::string_view> flag;
      if (event.value) flag = *event.value;
      return map_lab_event(event.name, flag, options.missing_lab_flag);
    }
    case EventType::microbiology:
      return map_micro_event(event.name, event.value.value_or(""));
    case EventType::age: {
      const std::string_view text = trim(event.value ? *event.value : event.name);
      double years = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), years);
      if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw RejectedRecord("age value is not a number: '" + std::string(text) + "'");
      }
      return map_age(years);
    }
    case EventType::diagnosis:
      if (options.diagnosis_grouping) {
        const std::string code = normalize_icd9(event.name);
        if (!is_icd9_code(code)) throw RejectedRecord("malformed ICD-9 code '" + code + "'");
        auto group = options.diagnosis_grouping(code);
        if (!group) throw RejectedRecord("diagnosis code '" + code + "' has no group");
        return {NodeType::diagnosis, *group};
      }
      return map_coded_event(event.type, event.name);
    case EventType::procedure:
      return map_coded_event(event.type, event.name);
    case EventType::gender:
    case EventType::ethnicity:
    case EventType::prescription:
    case EventType::symptom:
      return map_categorical(event.type, event.name);
  }
  throw RejectedRecord("unknown event type");
}

}  // namespace hinrank
