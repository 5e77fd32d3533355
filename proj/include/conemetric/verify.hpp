#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace conemetric {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

constexpr int kCriteria = 12;

// Runs one acceptance criterion (1..12). Exceptions are caught and reported as failures.
CriterionResult run_criterion(int id, std::uint64_t seed = 20240611);

// Runs the listed criteria, or all of them when `ids` is empty.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {}, std::uint64_t seed = 20240611);

// "PASS [3] factorization roundtrip: ..." style line.
std::string format_line(const CriterionResult& r);

}  // namespace conemetric
