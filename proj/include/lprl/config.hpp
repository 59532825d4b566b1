#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lprl/error.hpp"
#include "lprl/ladder.hpp"
#include "lprl/seqspace.hpp"
#include "lprl/witness.hpp"

namespace lprl {

struct RunConfig {
  double a = 0.0;
  double q = 2.0;
  std::optional<std::vector<double>> ladder;
  std::uint64_t max_len = 10;
  double eta = kDefaultEta;
  std::uint64_t step_budget = kDefaultStepBudget;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  /// Block depth for the reduction suites.
  std::uint64_t k = 12;
  /// Divergence target.
  double target = 3.0;

  void validate() const {
    make_ladder();
    if (max_len < 1 || max_len > 40) {
      throw InvalidInput("max-len must be between 1 and 40");
    }
    static_cast<void>(Margin(eta));
    const int deepest = static_cast<int>(std::max<std::uint64_t>(max_len, k));
    if (!(eta < std::ldexp(1.0, -(deepest + 2)))) {
      throw InvalidInput("eta must be below 2^-(depth+2) = " +
                         format_double(std::ldexp(1.0, -(deepest + 2))));
    }
    if (step_budget == 0) throw InvalidInput("step budget must be positive");
    if (!(target >= 0.0) || !std::isfinite(target)) {
      throw InvalidInput("target must be finite and >= 0");
    }
  }

  ExpLadder make_ladder() const {
    return ladder ? ExpLadder(a, q, *ladder) : ExpLadder(a, q);
  }
  Margin margin() const { return Margin(eta); }
};

}  // namespace lprl
