#pragma once

#include <stdexcept>
#include <string>

namespace stca {

/// Shapes of two operands do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Attention was asked to run over a history with no events.
class EmptyHistoryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configuration value violates its documented constraints.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Token budget cannot hold the minimum length of every sequence.
class InfeasibleBudgetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Compaction requires the batch to fill the budget exactly.
class CompactionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two triplets share a grouping key but carry different histories.
class GroupingConflictError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A metric is undefined for the given input (e.g. AUC on one class).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed checkpoint, dataset or config file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stca
