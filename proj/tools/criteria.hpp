#pragma once

#include <string>
#include <string_view>

namespace plheat::criteria {

inline constexpr int kCount = 10;
/// Criteria 1..5 are the fast property suites run by `plheat verify`.
inline constexpr int kPropertySuites = 5;

struct Outcome {
  int id = 0;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // seconds
};

std::string_view title(int id);

/// Runs one criterion. Exceptions are caught and reported as failures; a
/// criterion that exceeds its runtime budget fails.
Outcome run(int id);

/// `criterion <id> PASS|FAIL  <title>  (<detail>)  <seconds> s / <budget> s`
std::string format(const Outcome& outcome);

}  // namespace plheat::criteria
