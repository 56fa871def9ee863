#pragma once

/// The acceptance suite: every criterion evaluated against independent
/// oracles, shared by `fbms verify-all` and the acceptance test binary.

#include <functional>
#include <string>
#include <vector>

#include "fbms/export.hpp"

namespace fbms::verify {

struct CriterionResult {
  int id = 0;
  std::string title;
  double budget_seconds = 0.0;
  double seconds = 0.0;
  std::vector<io::InvariantCheck> checks;
  std::vector<std::string> notes;
  std::string error;  // set when the criterion threw

  /// All checks passed, no error, and within the time budget.
  [[nodiscard]] bool passed() const;
};

inline constexpr int kCriterionCount = 14;

/// Runs a single criterion (1-based). Exceptions become a failed result.
[[nodiscard]] CriterionResult run_criterion(int id);

/// Runs every criterion in order; `on_result` is called after each.
[[nodiscard]] std::vector<CriterionResult> run_all(
    const std::function<void(const CriterionResult&)>& on_result = {});

/// One line, `PASS` or `FAIL`, id, title, timing and the first failing check.
[[nodiscard]] std::string summary_line(const CriterionResult& r);

}  // namespace fbms::verify
