#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace smap {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  bool skipped = false;
  /// Measured quantities, one line.
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  /// Criteria to run (1-11); empty runs all.
  std::set<int> only;
  /// Skip the PDE runs that take minutes (2, 3, 9 and 11).
  bool quick = false;
  /// Where series and monitor tables go; empty writes nothing.
  std::string artifact_dir;
  /// Called as each criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
};

std::vector<CriterionResult> run_verification(const VerifyOptions& options = {});

/// "PASS  3  stationarity of Q_k  (...)" style line.
std::string format_result_line(const CriterionResult& r);

}  // namespace smap
