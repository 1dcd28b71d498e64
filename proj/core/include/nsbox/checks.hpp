#pragma once

#include <string>
#include <vector>

namespace nsbox {

/// Outcome of one named verification step. `witness` explains a failure.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string witness;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;

  bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return !checks.empty();
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

}  // namespace nsbox
