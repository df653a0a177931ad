// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hinrank {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown schema label, invalid option value, schema violation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data cannot be used: missing table file or column, unreadable artifact.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A single record failed a node-mapping rule. Loaders count these and move on.
class RejectedRecord : public DataError {
 public:
  using DataError::DataError;
};

/// Subject falls outside the study population (age under 15).
class ExcludedSample : public DataError {
 public:
  using DataError::DataError;
};

/// Treatment-category events were offered as prediction input.
class LeakageError : public Error {
 public:
  using Error::Error;
};

/// None of a patient's events exist in the training vocabulary.
class ColdPatientError : public DataError {
 public:
  using DataError::DataError;
};

/// Patient has no diagnostic-type neighbors, so f(p) is undefined.
class UndefinedPatientError : public DataError {
 public:
  using DataError::DataError;
};

/// Metric is undefined for the input (e.g. AUROC over a single class).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace hinrank
