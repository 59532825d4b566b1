#pragma once

// Witness extension: given a prefix u whose p_i-power sums sit below caps
// r_i (i <= k), append a non-empty non-negative block v with
//
//   ||v||_q^q < eps,   ||u^v||_{p_i}^{p_i} < r_i (i <= k),
//   ||u^v||_{p_{k+1}}^{p_{k+1}} > M.
//
// v is a window x_{n0..n1} of x_n = (n+1)^{-1/p_{k+1}}, which lies in
// l^{p_k} but not in l^{p_{k+1}}. n0 is the least index (>= 1, so x_n < 1)
// whose p_k-tail fits under min(delta, eps); n1 is the least index past
// which the harmonic window sum exceeds M + eta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lprl/error.hpp"
#include "lprl/numeric.hpp"
#include "lprl/report.hpp"
#include "lprl/seqspace.hpp"

namespace lprl {

inline constexpr std::uint64_t kDefaultStepBudget = 100'000'000;

struct ClaimRequest {
  FinSeq u;
  Exponent q{2.0};
  /// p_0 > p_1 > ... > p_{k+1}; one more entry than `caps`.
  std::vector<Exponent> exps;
  /// r_0, ..., r_k (may be empty: only eps and M are active).
  std::vector<double> caps;
  /// M, the divergence target at p_{k+1}.
  double target = 1.0;
  /// The q-power budget.
  double eps = 1.0;
  /// Search work allowed (enclosure evaluations plus directly summed terms).
  std::uint64_t step_budget = kDefaultStepBudget;
};

struct ClaimWitness {
  FinSeq v;
  double n0 = 0.0;
  double n1 = 0.0;
  std::uint64_t steps = 0;
};

/// x_n = (n+1)^{-1/p_bottom}.
inline double generator_entry(std::uint64_t n, Exponent p_bottom) {
  return std::pow(static_cast<double>(n) + 1.0, -1.0 / p_bottom.value());
}

namespace detail {

inline constexpr double kIndexCeiling = 1e300;

inline void validate_shape(const ClaimRequest& req) {
  if (req.exps.size() != req.caps.size() + 1) {
    throw InvalidInput("claim request needs exactly one more exponent than caps");
  }
  double prev = req.q.value();
  for (const auto& p : req.exps) {
    if (!(p.value() < prev)) {
      throw InvalidInput("claim request needs q > p_0 > ... > p_{k+1} > 0");
    }
    prev = p.value();
  }
  for (double r : req.caps) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw InvalidInput("caps must be finite and > 0");
    }
  }
  if (!(req.target > 0.0) || !std::isfinite(req.target) || !(req.eps > 0.0) ||
      !std::isfinite(req.eps)) {
    throw InvalidInput("M and eps must be finite and > 0");
  }
}

class StepMeter {
 public:
  explicit StepMeter(std::uint64_t budget) : budget_(budget) {}

  void charge(std::uint64_t steps, const char* phase, double progress) {
    used_ += steps;
    if (used_ > budget_) {
      throw ResourceLimit(std::string("witness search exceeded step budget in ") +
                              phase + " (partial sum " +
                              format_double(progress) + ")",
                          progress);
    }
  }
  std::uint64_t used() const { return used_; }

 private:
  std::uint64_t budget_;
  std::uint64_t used_ = 0;
};

// Least integer-valued n in (lo, hi] with pred(n), given !pred(lo), pred(hi)
// and pred monotone.
template <typename Pred>
double bisect_least(double lo, double hi, Pred&& pred) {
  for (;;) {
    const double mid = std::floor(lo + (hi - lo) / 2.0);
    if (mid <= lo || mid >= hi) return hi;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
}

inline void check_index(double n, const char* what, double progress) {
  if (!std::isfinite(n) || n > kIndexCeiling) {
    throw ResourceLimit(std::string("witness index ") + what +
                            " left the representable range",
                        progress);
  }
}

}  // namespace detail

/// Re-checks every witness inequality through the reference summation
/// route, independent of the bounds used to construct the witness.
inline CheckReport verify_witness(const ClaimRequest& req, const ClaimWitness& w,
                                  Margin m = {}) {
  detail::validate_shape(req);
  CheckReport report;
  const double len = w.v.length();
  report.add("non-empty", len, ">=", 1.0, len >= 1.0);

  bool nonneg = true;
  for (const auto& s : w.v.segments()) {
    if (const auto* block = std::get_if<ValueBlock>(&s)) {
      for (double x : block->values) nonneg = nonneg && x >= 0.0;
    } else {
      nonneg = nonneg && std::get<PowerRun>(s).scale >= 0.0;
    }
  }
  report.add("entries non-negative", nonneg ? 1.0 : 0.0, "==", 1.0, nonneg);

  const Bounds cost = power_sum(w.v, req.q, SumRoute::reference);
  report.add("q-cost", cost.hi, "<", req.eps,
             certified_less(cost.hi, req.eps, m));

  const FinSeq joined = concat(req.u, w.v);
  for (std::size_t i = 0; i < req.caps.size(); ++i) {
    const Bounds s = power_sum(joined, req.exps[i], SumRoute::reference);
    report.add("cap " + std::to_string(i), s.hi, "<", req.caps[i],
               certified_less(s.hi, req.caps[i], m));
  }
  const Bounds grow =
      power_sum(joined, req.exps.back(), SumRoute::reference);
  report.add("growth", req.target, "<", grow.lo,
             certified_less(req.target, grow.lo, m));
  return report;
}

inline ClaimWitness extend(const ClaimRequest& req, Margin m = {}) {
  detail::validate_shape(req);

  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < req.caps.size(); ++i) {
    const double hi = power_sum(req.u, req.exps[i]).hi;
    if (!certified_less(hi, req.caps[i], m)) {
      throw PreconditionError("prefix power sum " + format_double(hi) +
                              " at p_" + std::to_string(i) +
                              " is not certified below cap " +
                              format_double(req.caps[i]));
    }
    delta = std::min(delta, req.caps[i] - hi);
  }
  const double budget = std::min(delta, req.eps);
  if (!(budget > m.eta)) {
    throw PreconditionError("q-budget eps must exceed the margin");
  }

  const double bottom = req.exps.back().value();
  const double upper =
      req.caps.empty() ? req.q.value() : req.exps[req.caps.size() - 1].value();
  const double s = upper / bottom;
  constexpr std::size_t kHead = detail::kAnalyticHead;
  detail::StepMeter meter(req.step_budget);

  // n0: the p_k-tail of the generator from n0 on fits under the budget.
  auto tail_fits = [&](double n) {
    meter.charge(kHead + 1, "tail search", n);
    const double tail =
        enclose_power_range(n, std::numeric_limits<double>::infinity(), s, kHead)
            .hi;
    return certified_less(tail, budget, m);
  };
  auto find_n0 = [&](double floor_n) {
    if (tail_fits(floor_n)) return floor_n;
    // sum_{n>=N} (n+1)^{-s} <= N^{1-s}/(s-1)
    double hi = std::max(
        floor_n + 1.0,
        std::ceil(std::pow((s - 1.0) * (budget - m.eta), -1.0 / (s - 1.0))));
    detail::check_index(hi, "n0", budget);
    while (!tail_fits(hi)) {
      hi = 2.0 * hi;
      detail::check_index(hi, "n0", budget);
    }
    return detail::bisect_least(floor_n, hi, tail_fits);
  };

  // n1: the harmonic window sum_{n0..n1} (n+1)^{-1} passes M + eta.
  const double goal = req.target + m.eta;
  auto find_n1 = [&](double n0) {
    double reached = 0.0;
    auto passes = [&](double n) {
      meter.charge(kHead + 1, "growth search", reached);
      reached = enclose_power_range(n0, n, 1.0, kHead).lo;
      return reached > goal;
    };
    if (passes(n0)) return n0;
    double hi = std::max(n0 + 1.0, std::floor((n0 + 1.0) * std::exp(goal)));
    double lo = n0;
    detail::check_index(hi, "n1", reached);
    while (!passes(hi)) {
      lo = hi;
      hi = 2.0 * hi + 1.0;
      detail::check_index(hi, "n1", reached);
    }
    return detail::bisect_least(lo, hi, passes);
  };

  double n0 = find_n0(1.0);
  double n1 = find_n1(n0);
  for (int attempt = 0; attempt < 32; ++attempt) {
    ClaimWitness w{FinSeq::run(n0, n1, bottom), n0, n1, meter.used()};
    const CheckReport report = verify_witness(req, w, m);
    if (report.ok()) return w;
    const Check* growth = report.find("growth");
    if (report.failures() == 1 && growth && !growth->pass) {
      n1 += std::max(1.0, std::ceil(n1 * 1e-9));
    } else {
      n0 = find_n0(2.0 * n0);
      n1 = find_n1(n0);
    }
    detail::check_index(n1, "n1", growth ? growth->rhs : 0.0);
  }
  throw ResourceLimit("witness failed independent verification repeatedly",
                      static_cast<double>(n1));
}

}  // namespace lprl
