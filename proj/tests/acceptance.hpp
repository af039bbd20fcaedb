#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace acceptance {

struct CriterionResult {
  int number = 0;
  bool pass = false;
  std::string summary;
};

/// Evaluates criteria 1 to 10 and prints one PASS/FAIL line each; true when all pass.
bool run_all(std::ostream& out);

std::vector<CriterionResult> evaluate();

}  // namespace acceptance
