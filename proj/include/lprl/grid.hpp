#pragma once

// The diagonal pairing <i,j> and the depth/level of finite binary strings.
//
//   0 = <0,0>  2 = <0,1>  5 = <0,2>  9 = <0,3>
//   1 = <1,0>  4 = <1,1>  8 = <1,2>
//   3 = <2,0>  7 = <2,1>
//   6 = <3,0>
//
// Anti-diagonal i+j = d is walked from row d up to row 0, so
// <i,j> = d(d+1)/2 + j.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lprl/error.hpp"

namespace lprl {

using u64 = std::uint64_t;

namespace detail {

__extension__ using u128 = unsigned __int128;

// d(d+1)/2 in 128 bits.
inline u128 triangle(u64 d) {
  return static_cast<u128>(d) * (d + 1) / 2;
}

// The anti-diagonal containing index n: largest d with d(d+1)/2 <= n.
inline u64 diagonal_of(u64 n) {
  const long double estimate =
      (std::sqrt(8.0L * static_cast<long double>(n) + 1.0L) - 1.0L) / 2.0L;
  u64 d = static_cast<u64>(estimate);
  while (d > 0 && triangle(d) > n) --d;
  while (triangle(d + 1) <= n) ++d;
  return d;
}

}  // namespace detail

inline u64 pair(u64 i, u64 j) {
  constexpr u64 kMax = std::numeric_limits<u64>::max();
  if (i > kMax - j) throw OverflowError("pair: row + column overflows");
  const u64 d = i + j;
  const detail::u128 index = detail::triangle(d) + j;
  if (index > kMax) throw OverflowError("pair: index overflows 64 bits");
  return static_cast<u64>(index);
}

inline std::pair<u64, u64> unpair(u64 n) {
  const u64 d = detail::diagonal_of(n);
  const u64 j = n - static_cast<u64>(detail::triangle(d));
  return {d - j, j};
}

struct GridPosition {
  u64 row = 0;
  u64 col = 0;
  u64 index = 0;

  static GridPosition of_index(u64 n) {
    auto [i, j] = unpair(n);
    return {i, j, n};
  }
  static GridPosition of_cell(u64 i, u64 j) { return {i, j, pair(i, j)}; }
  friend bool operator==(const GridPosition&, const GridPosition&) = default;
};

/// Finite sequence over {0,1}.
class BitString {
 public:
  BitString() = default;

  /// From "0110"-style text; throws ParseError on any other character.
  explicit BitString(std::string_view text) {
    bits_.reserve(text.size());
    for (std::size_t k = 0; k < text.size(); ++k) {
      if (text[k] != '0' && text[k] != '1') {
        throw ParseError("bit string may only contain 0 and 1", k);
      }
      bits_.push_back(static_cast<std::uint8_t>(text[k] - '0'));
    }
  }

  BitString(std::initializer_list<int> bits) {
    for (int b : bits) push_back(b);
  }

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  int operator[](std::size_t k) const { return bits_[k]; }
  int back() const { return bits_.back(); }

  void push_back(int bit) {
    if (bit != 0 && bit != 1) throw InvalidInput("bit must be 0 or 1");
    bits_.push_back(static_cast<std::uint8_t>(bit));
  }

  BitString extended(int bit) const {
    BitString out = *this;
    out.push_back(bit);
    return out;
  }

  BitString prefix(std::size_t len) const {
    if (len > size()) throw DomainError("prefix longer than string");
    BitString out;
    out.bits_.assign(bits_.begin(),
                     bits_.begin() + static_cast<std::ptrdiff_t>(len));
    return out;
  }

  /// this is an initial segment of other.
  bool is_prefix_of(const BitString& other) const {
    return size() <= other.size() &&
           std::equal(bits_.begin(), bits_.end(), other.bits_.begin());
  }

  std::string to_string() const {
    std::string out;
    out.reserve(size());
    for (auto b : bits_) out.push_back(static_cast<char>('0' + b));
    return out;
  }

  /// Shorter strings first, then lexicographic.
  friend std::strong_ordering operator<=>(const BitString& a,
                                          const BitString& b) {
    if (auto c = a.size() <=> b.size(); c != 0) return c;
    return a.bits_ <=> b.bits_;
  }
  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Depth of any string of length `len`: the largest row reached by the
/// indices 0..len-1, i.e. the anti-diagonal of len-1. -1 when len = 0.
inline std::int64_t depth_of_length(u64 len) {
  if (len == 0) return -1;
  return static_cast<std::int64_t>(detail::diagonal_of(len - 1));
}

/// Level of any string of length `len` >= 1: the row of index len-1.
inline u64 level_of_length(u64 len) {
  if (len == 0) throw DomainError("level is undefined for the empty string");
  return unpair(len - 1).first;
}

inline std::int64_t depth(const BitString& s) { return depth_of_length(s.size()); }
inline u64 level(const BitString& s) { return level_of_length(s.size()); }

struct LawViolation {
  std::string law;
  std::string detail;
};

struct LawReport {
  BitString sigma;
  int bit = 0;
  std::vector<LawViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks the five depth/level transition laws on (s, s^(bit)).
inline LawReport extend_laws_check(const BitString& s, int bit) {
  if (s.empty()) {
    throw DomainError("transition laws are stated for non-empty strings");
  }
  LawReport report{s, bit, {}};
  const BitString t = s.extended(bit);
  const std::int64_t ds = depth(s), dt = depth(t);
  const auto ls = static_cast<std::int64_t>(level(s));
  const auto lt = static_cast<std::int64_t>(level(t));
  auto fail = [&](const char* law) {
    report.violations.push_back(
        {law, "sigma=" + s.to_string() + " d=" + std::to_string(ds) +
                  " l=" + std::to_string(ls) + "; extended d=" +
                  std::to_string(dt) + " l=" + std::to_string(lt)});
  };
  if (!(ls <= ds) || !(lt <= dt)) fail("level <= depth");
  if (!(ds <= dt)) fail("depth monotone under extension");
  if (!(dt <= ds + 1)) fail("depth grows by at most one");
  if (ls == 0 && !(lt == dt && dt == ds + 1)) fail("level 0 opens a new row");
  if (ls > 0 && !(lt == ls - 1 && dt == ds)) fail("positive level steps up");
  return report;
}

}  // namespace lprl
