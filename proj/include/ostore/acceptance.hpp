#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ostore {

struct AcceptanceOptions {
  bool quick = false;
  // Criterion numbers to run, e.g. {"3", "10"}; empty runs all.
  std::vector<std::string> only;
};

struct CriterionResult {
  std::string id;
  std::string name;
  bool pass = false;
  bool informational = false;
  std::string detail;
};

// Runs every acceptance criterion, printing one PASS/FAIL line per criterion as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out);

}  // namespace ostore
