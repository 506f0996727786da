#pragma once

#include <string>
#include <vector>

#include "shelab/config.hpp"
#include "shelab/report.hpp"

namespace shelab {

/// One acceptance criterion, summarized from the underlying check records.
struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

struct AcceptanceResult {
  std::vector<CriterionResult> criteria;
  bool all_pass() const;
};

/// Runs criteria 1-12 into `rep` (criterion 13 compares two whole runs and is
/// left to the caller, see determinism_check).
AcceptanceResult run_acceptance(const ExperimentConfig& cfg, RunReport& rep);

/// Criterion 13: two `verify` reports serialize to the same bytes.
CriterionResult determinism_check(const std::string& first, const std::string& second);

/// "criterion  3 PASS  identity residual ..." style line.
std::string format_criterion(const CriterionResult& c);

}  // namespace shelab
