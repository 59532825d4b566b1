#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lprl/error.hpp"

namespace lprl {

/// A strictly positive exponent (p, q or b).
class Exponent {
 public:
  explicit Exponent(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw InvalidInput("exponent must be finite and > 0, got " +
                         std::to_string(value));
    }
  }

  double value() const { return value_; }
  friend bool operator==(Exponent, Exponent) = default;

 private:
  double value_;
};

/// The exponents q > p_0 > p_1 > ... > a >= 0 with p_i -> a.
///
/// Without an explicit list the ladder is p_i = a + (q - a) 2^{-(i+1)}.
/// An explicit list is finite; asking for an index past its end throws.
class ExpLadder {
 public:
  ExpLadder(double a, double q) : a_(a), q_(q) { validate(); }

  ExpLadder(double a, double q, std::vector<double> explicit_exponents)
      : a_(a), q_(q), explicit_(std::move(explicit_exponents)) {
    validate();
  }

  double a() const { return a_; }
  double q() const { return q_; }
  bool is_default() const { return !explicit_.has_value(); }
  const std::optional<std::vector<double>>& explicit_exponents() const {
    return explicit_;
  }

  double p(std::size_t i) const {
    if (explicit_) {
      if (i >= explicit_->size()) {
        throw DomainError("ladder override has only " +
                          std::to_string(explicit_->size()) +
                          " exponents, index " + std::to_string(i) +
                          " requested");
      }
      return (*explicit_)[i];
    }
    // 2^{-(i+1)} underflows the gap to a long before i reaches this.
    if (i >= kMaxDefaultIndex) {
      throw DomainError("ladder index too large");
    }
    return a_ + (q_ - a_) * std::ldexp(1.0, -static_cast<int>(i + 1));
  }

  Exponent exponent(std::size_t i) const { return Exponent(p(i)); }

  /// p_0, ..., p_count-1.
  std::vector<double> prefix(std::size_t count) const {
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(p(i));
    return out;
  }

  friend bool operator==(const ExpLadder&, const ExpLadder&) = default;

 private:
  static constexpr std::size_t kMaxDefaultIndex = 900;

  void validate() const {
    if (!(a_ >= 0.0) || !std::isfinite(a_) || !std::isfinite(q_) ||
        !(q_ > a_)) {
      throw InvalidInput("ladder needs 0 <= a < q < inf");
    }
    if (!explicit_) return;
    if (explicit_->empty()) throw InvalidInput("empty ladder override");
    double prev = q_;
    for (double p : *explicit_) {
      if (!std::isfinite(p) || !(p < prev) || !(p > a_)) {
        throw InvalidInput(
            "ladder override must satisfy q > p_0 > p_1 > ... > a");
      }
      prev = p;
    }
  }

  double a_;
  double q_;
  std::optional<std::vector<double>> explicit_;
};

}  // namespace lprl
