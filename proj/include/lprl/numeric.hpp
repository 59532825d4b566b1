#pragma once

// Low-level numerics shared by the sequence-space code: compensated
// summation, two-sided enclosures and certified sums of the power tails
// sum_{n=first}^{last} (n+1)^{-e}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>

#include "lprl/error.hpp"

namespace lprl {

/// Closed interval [lo, hi] known to contain a real quantity.
struct Bounds {
  double lo = 0.0;
  double hi = 0.0;

  double mid() const { return lo + (hi - lo) / 2.0; }
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }

  Bounds& operator+=(const Bounds& other) {
    lo += other.lo;
    hi += other.hi;
    return *this;
  }
  friend Bounds operator+(Bounds a, const Bounds& b) { return a += b; }

  /// Multiplies by a non-negative factor, widening by one relative ulp-ish
  /// step on each side to absorb the rounding of the product.
  Bounds scaled(double factor) const {
    if (factor == 1.0) return *this;
    constexpr double kRound = 4.0 * std::numeric_limits<double>::epsilon();
    return {std::max(0.0, lo * factor * (1.0 - kRound)),
            hi * factor * (1.0 + kRound)};
  }
};

/// Neumaier's variant of Kahan summation. Terms are consumed left to right,
/// so the result is a deterministic function of the term order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
    ++count_;
  }

  double value() const { return sum_ + carry_; }
  std::size_t count() const { return count_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
  std::size_t count_ = 0;
};

/// Relative slack added to every computed sum. Covers pow() error (<= 1 ulp
/// per call), the compensated accumulation and the closed-form EM terms.
inline constexpr double kRelativeSlack = 1e-13;

/// Integer-valued doubles beyond this are not stepped through one by one.
inline constexpr double kExactIndexLimit = 0x1p52;

/// Shortest "%.17g" rendering; round-trips every finite double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

// int_a^b (x+1)^{-e} dx for finite a <= b, evaluated without cancellation
// when e is close to 1.
inline double power_integral(double a, double b, double e) {
  const double log_ratio = std::log1p((b - a) / (a + 1.0));
  if (e == 1.0) return log_ratio;
  const double c = 1.0 - e;
  return std::pow(a + 1.0, c) * std::expm1(c * log_ratio) / c;
}

}  // namespace detail

/// Certified enclosure of sum_{n=first}^{last} (n+1)^{-e}.
///
/// The first `head` terms (or fewer, if indices stop being exactly
/// representable) are summed directly. The remainder on [a, last] uses
/// Euler-Maclaurin through the B_4 term,
///   I + (f(a)+f(b))/2 + (f'(b)-f'(a))/12 - (f'''(b)-f'''(a))/720,
/// whose remainder is bounded by |f'''(b)-f'''(a)|/720 for f = (x+1)^{-e}.
/// `last` may be +infinity, which requires e > 1.
inline Bounds enclose_power_range(double first, double last, double e,
                                  std::size_t head) {
  if (!(first >= 0.0) || std::isnan(last) || !(e > 0.0) || !std::isfinite(e)) {
    throw InvalidInput("power range needs first >= 0, e > 0");
  }
  if (last < first) return {0.0, 0.0};
  if (std::isinf(last) && e <= 1.0) {
    throw DomainError("infinite power tail diverges for e <= 1");
  }

  CompensatedSum direct;
  double n = first;
  while (direct.count() < head && n <= last && n < kExactIndexLimit) {
    direct.add(std::pow(n + 1.0, -e));
    n += 1.0;
  }
  double value = direct.value();
  double remainder = 0.0;

  if (n <= last) {
    const double a = n;
    const double fa = std::pow(a + 1.0, -e);
    const double d1a = -e * std::pow(a + 1.0, -e - 1.0);
    const double d3a = -e * (e + 1.0) * (e + 2.0) * std::pow(a + 1.0, -e - 3.0);
    double integral = 0.0, fb = 0.0, d1b = 0.0, d3b = 0.0;
    if (std::isinf(last)) {
      integral = std::pow(a + 1.0, 1.0 - e) / (e - 1.0);
    } else {
      const double b = last;
      integral = detail::power_integral(a, b, e);
      fb = std::pow(b + 1.0, -e);
      d1b = -e * std::pow(b + 1.0, -e - 1.0);
      d3b = -e * (e + 1.0) * (e + 2.0) * std::pow(b + 1.0, -e - 3.0);
    }
    value += integral + 0.5 * (fa + fb) + (d1b - d1a) / 12.0 -
             (d3b - d3a) / 720.0;
    remainder = std::fabs(d3b - d3a) / 720.0;
  }
  if (!std::isfinite(value)) {
    throw OverflowError("power sum is not representable");
  }
  // Each underflowed term may lose up to DBL_MIN.
  const double slack =
      kRelativeSlack * std::fabs(value) + remainder +
      static_cast<double>(direct.count() + 4) * std::numeric_limits<double>::min();
  return {std::max(0.0, value - slack), value + slack};
}

}  // namespace lprl
