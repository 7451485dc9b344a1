#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace hypflow::checks {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  nlohmann::json detail;
};

struct SuiteReport {
  std::uint64_t seed = 0;
  std::vector<CheckResult> results;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

// Runs the invariant battery of every module on seeded random samples and
// on the census instances. Deterministic for a fixed seed.
SuiteReport run_property_suite(std::uint64_t seed);

}  // namespace hypflow::checks
