// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace hinrank {

// Diagnostic types come first so that their enumerator value doubles as the
// index into per-type weight tables.
enum class EventType : std::uint8_t {
  laboratory,
  symptom,
  age,
  gender,
  ethnicity,
  microbiology,
  prescription,
  procedure,
  diagnosis,
};

inline constexpr std::size_t kEventTypeCount = 9;
inline constexpr std::size_t kDiagnosticTypeCount = 6;

inline constexpr std::array<EventType, kEventTypeCount> kAllEventTypes = {
    EventType::laboratory,   EventType::symptom,      EventType::age,
    EventType::gender,       EventType::ethnicity,    EventType::microbiology,
    EventType::prescription, EventType::procedure,    EventType::diagnosis};

inline constexpr std::array<EventType, kDiagnosticTypeCount> kDiagnosticTypes = {
    EventType::laboratory, EventType::symptom,   EventType::age,
    EventType::gender,     EventType::ethnicity, EventType::microbiology};

inline constexpr std::array<EventType, 3> kTreatmentTypes = {
    EventType::prescription, EventType::procedure, EventType::diagnosis};

enum class TypeCategory : std::uint8_t { diagnostic, treatment };

constexpr TypeCategory category(EventType t) {
  return static_cast<std::size_t>(t) < kDiagnosticTypeCount ? TypeCategory::diagnostic
                                                            : TypeCategory::treatment;
}

constexpr bool is_diagnostic(EventType t) { return category(t) == TypeCategory::diagnostic; }

// Graph node types: the patient hub plus one per event type.
enum class NodeType : std::uint8_t {
  patient,
  laboratory,
  symptom,
  age,
  gender,
  ethnicity,
  microbiology,
  prescription,
  procedure,
  diagnosis,
};

inline constexpr std::size_t kNodeTypeCount = 10;

constexpr NodeType to_node_type(EventType t) {
  return static_cast<NodeType>(static_cast<std::uint8_t>(t) + 1);
}

/// Event type for a non-patient node type; nullopt for patient.
constexpr std::optional<EventType> to_event_type(NodeType t) {
  if (t == NodeType::patient) return std::nullopt;
  return static_cast<EventType>(static_cast<std::uint8_t>(t) - 1);
}

constexpr std::size_t index_of(NodeType t) { return static_cast<std::size_t>(t); }
constexpr std::size_t index_of(EventType t) { return static_cast<std::size_t>(t); }

/// Short tag used in files and path labels: pati, lab, symp, age, gen, eth,
/// micro, pres, proc, diag.
std::string_view type_tag(NodeType t);
std::string_view type_tag(EventType t);

/// Accepts short tags and long names ("laboratory", "prescription", ...).
std::optional<NodeType> parse_node_type(std::string_view text);
std::optional<EventType> parse_event_type(std::string_view text);

/// One EHR record: (type, name, value).
struct ClinicalEvent {
  EventType type;
  std::string name;
  std::optional<std::string> value;

  friend bool operator==(const ClinicalEvent&, const ClinicalEvent&) = default;
};

struct NodeKey {
  NodeType type;
  std::string identity;

  friend bool operator==(const NodeKey&, const NodeKey&) = default;
  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;

  /// "tag:identity", e.g. "lab:Glucose:abnormal".
  std::string str() const;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const noexcept {
    return std::hash<std::string>{}(k.identity) * 31 + static_cast<std::size_t>(k.type);
  }
};

// Mapping rules. All throw RejectedRecord on malformed input.

NodeKey map_lab_event(std::string_view name, std::optional<std::string_view> flag,
                      std::string_view missing_flag = "normal");
NodeKey map_micro_event(std::string_view name, std::string_view interpretation);
/// Throws ExcludedSample below 15 years.
NodeKey map_age(double age_years);
NodeKey map_coded_event(EventType type, std::string_view icd9_code);
NodeKey map_categorical(EventType type, std::string_view name);

/// ICD-9 lexical check: 3-5 characters, digits with an optional leading E or V.
bool is_icd9_code(std::string_view code);
std::string normalize_icd9(std::string_view code);

/// Trim ASCII whitespace.
std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

struct MappingOptions {
  std::string missing_lab_flag = "normal";
  /// When set, diagnosis codes are replaced by the returned group label
  /// (cohort-level training). Codes the grouping rejects are RejectedRecord.
  std::function<std::optional<std::string>(std::string_view)> diagnosis_grouping;
};

/// Dispatches to the single map_* rule for the event's type.
NodeKey map_event(const ClinicalEvent& event, const MappingOptions& options = {});

}  // namespace hinrank
