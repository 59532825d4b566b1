#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace lprl {

/// One evaluated inequality: `lhs relation rhs`, with the outcome.
struct Check {
  std::string name;
  double lhs = 0.0;
  std::string relation;
  double rhs = 0.0;
  bool pass = false;
  std::string detail;
};

struct CheckReport {
  std::vector<Check> checks;

  void add(std::string name, double lhs, std::string relation, double rhs,
           bool pass, std::string detail = {}) {
    checks.push_back({std::move(name), lhs, std::move(relation), rhs, pass,
                      std::move(detail)});
  }

  void append(const CheckReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(
        checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
  }

  bool ok() const { return failures() == 0; }

  const Check* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

}  // namespace lprl
