#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace polyest {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

// Suites: lemma-rademacher, tail-bounds, cone-fuzz, closed-forms, all.
const std::vector<std::string>& verify_suites();
// Throws std::invalid_argument for unknown suite names.
VerifyReport run_verify(const std::string& suite, std::uint64_t seed = 1, int jobs = 1);

}  // namespace polyest
