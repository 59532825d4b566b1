#pragma once

// The map alpha |-> f(alpha) from Cantor space into l^q, evaluated on
// finitely described points alpha.
//
// f(alpha) is the union of phi((alpha(0), ..., alpha(k))) over k. Its block
// u_k is the increment of phi at step k, and ||u_k||_q^q < 2^{-(k+1)}.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "lprl/construction.hpp"
#include "lprl/error.hpp"
#include "lprl/grid.hpp"
#include "lprl/numeric.hpp"
#include "lprl/report.hpp"
#include "lprl/seqspace.hpp"

namespace lprl {

// --------------------------------------------------------------------------
// Points of Cantor space

/// Ones exactly at the listed columns.
struct FiniteOnes {
  std::set<u64> cols;
  friend bool operator==(const FiniteOnes&, const FiniteOnes&) = default;
};

/// Ones at every column j >= j_start.
struct EventuallyOne {
  u64 j_start = 0;
  friend bool operator==(const EventuallyOne&, const EventuallyOne&) = default;
};

/// Ones at the columns j >= j_min with j = r (mod m).
struct PeriodicOnes {
  u64 r = 0;
  u64 m = 1;
  u64 j_min = 0;
  friend bool operator==(const PeriodicOnes&, const PeriodicOnes&) = default;
};

using RowPattern = std::variant<FiniteOnes, EventuallyOne, PeriodicOnes>;

/// alpha(<i,j>) = rows[i] at column j; undeclared rows are zero.
struct AlphaSpec {
  std::map<u64, RowPattern> rows;
  friend bool operator==(const AlphaSpec&, const AlphaSpec&) = default;
};

using BitOracle = std::function<int(u64)>;

inline int pattern_bit(const RowPattern& pattern, u64 j) {
  return std::visit(
      [j](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FiniteOnes>) {
          return p.cols.count(j) ? 1 : 0;
        } else if constexpr (std::is_same_v<T, EventuallyOne>) {
          return j >= p.j_start ? 1 : 0;
        } else {
          return j >= p.j_min && j % p.m == p.r % p.m ? 1 : 0;
        }
      },
      pattern);
}

inline int alpha_bit(const AlphaSpec& spec, u64 n) {
  const auto [i, j] = unpair(n);
  const auto it = spec.rows.find(i);
  return it == spec.rows.end() ? 0 : pattern_bit(it->second, j);
}

/// Every row eventually zero.
inline bool in_P3(const AlphaSpec& spec) {
  return std::all_of(spec.rows.begin(), spec.rows.end(), [](const auto& kv) {
    return std::holds_alternative<FiniteOnes>(kv.second);
  });
}

/// (alpha(0), ..., alpha(len-1)).
inline BitString alpha_prefix(const BitOracle& alpha, u64 len) {
  BitString out;
  for (u64 n = 0; n < len; ++n) out.push_back(alpha(n));
  return out;
}

inline BitString alpha_prefix(const AlphaSpec& spec, u64 len) {
  return alpha_prefix([&spec](u64 n) { return alpha_bit(spec, n); }, len);
}

// --------------------------------------------------------------------------
// Text form
//
//   row=<i>:finite{j,...} | row=<i>:eventually(j) | row=<i>:periodic(r,m,j)
//
// joined by ';'. The empty string is the all-zero point.

namespace detail {

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  AlphaSpec parse() {
    AlphaSpec spec;
    skip_space();
    if (done()) return spec;
    for (;;) {
      const std::size_t start = pos_;
      keyword("row");
      expect('=');
      const u64 row = number();
      expect(':');
      RowPattern pattern = row_pattern();
      if (!spec.rows.emplace(row, std::move(pattern)).second) {
        throw ParseError("row " + std::to_string(row) + " declared twice", start);
      }
      skip_space();
      if (done()) return spec;
      expect(';');
      skip_space();
      if (done()) return spec;
    }
  }

 private:
  RowPattern row_pattern() {
    skip_space();
    const std::size_t start = pos_;
    std::string word;
    while (!done() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      word.push_back(text_[pos_++]);
    }
    if (word == "finite") {
      expect('{');
      FiniteOnes f;
      skip_space();
      if (peek() == '}') {
        ++pos_;
        return f;
      }
      for (;;) {
        f.cols.insert(number());
        skip_space();
        if (peek() == '}') {
          ++pos_;
          return f;
        }
        expect(',');
      }
    }
    if (word == "eventually") {
      expect('(');
      EventuallyOne e{number()};
      expect(')');
      return e;
    }
    if (word == "periodic") {
      expect('(');
      PeriodicOnes p;
      p.r = number();
      expect(',');
      const std::size_t at = pos_;
      p.m = number();
      if (p.m == 0) throw ParseError("periodic modulus must be positive", at);
      expect(',');
      p.j_min = number();
      expect(')');
      return p;
    }
    throw ParseError("unknown row pattern '" + word + "'", start);
  }

  void keyword(std::string_view kw) {
    skip_space();
    if (text_.substr(pos_, kw.size()) != kw) {
      throw ParseError("expected '" + std::string(kw) + "', found " + found(),
                       pos_);
    }
    pos_ += kw.size();
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) {
      throw ParseError(std::string("expected '") + c + "', found " + found(),
                       pos_);
    }
    ++pos_;
  }

  u64 number() {
    skip_space();
    const std::size_t start = pos_;
    u64 v = 0;
    while (!done() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      const u64 digit = static_cast<u64>(text_[pos_] - '0');
      if (v > (UINT64_MAX - digit) / 10) {
        throw ParseError("number too large", start);
      }
      v = v * 10 + digit;
      ++pos_;
    }
    if (pos_ == start) throw ParseError("expected a number, found " + found(), start);
    return v;
  }

  std::string found() const {
    if (done()) return "end of input";
    std::size_t end = pos_;
    while (end < text_.size() && end - pos_ < 12 && text_[end] != ';') ++end;
    return "'" + std::string(text_.substr(pos_, std::max<std::size_t>(1, end - pos_))) + "'";
  }

  char peek() const { return done() ? '\0' : text_[pos_]; }
  bool done() const { return pos_ >= text_.size(); }
  void skip_space() {
    while (!done() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline AlphaSpec parse_alpha_spec(std::string_view text) {
  return detail::SpecParser(text).parse();
}

inline std::string to_string(const AlphaSpec& spec) {
  std::string out;
  for (const auto& [row, pattern] : spec.rows) {
    if (!out.empty()) out += ';';
    out += "row=" + std::to_string(row) + ':';
    if (const auto* f = std::get_if<FiniteOnes>(&pattern)) {
      out += "finite{";
      bool first = true;
      for (u64 j : f->cols) {
        if (!first) out += ',';
        out += std::to_string(j);
        first = false;
      }
      out += '}';
    } else if (const auto* e = std::get_if<EventuallyOne>(&pattern)) {
      out += "eventually(" + std::to_string(e->j_start) + ')';
    } else {
      const auto& p = std::get<PeriodicOnes>(pattern);
      out += "periodic(" + std::to_string(p.r) + ',' + std::to_string(p.m) +
             ',' + std::to_string(p.j_min) + ')';
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Blocks and prefixes

struct BlockDecomposition {
  /// u_0, ..., u_k.
  std::vector<FinSeq> blocks;
  /// (alpha(0), ..., alpha(k)).
  BitString path;
  u64 k = 0;
  double q = 0.0;

  FinSeq prefix() const {
    FinSeq out;
    for (const auto& b : blocks) out.append(b);
    return out;
  }
};

/// An initial segment of f(alpha), with ||f(alpha) - prefix||_q^q bounded
/// by tail_q_bound.
struct PrefixCertificate {
  FinSeq prefix;
  u64 blocks_used = 0;
  double tail_q_bound = 0.0;
  double q = 0.0;
};

inline BlockDecomposition f_blocks(ConstructionCache& cache,
                                   const BitOracle& alpha, u64 k) {
  BlockDecomposition bd;
  bd.path = alpha_prefix(alpha, k + 1);
  bd.k = k;
  bd.q = cache.ladder().q();
  cache.build(bd.path);
  const FinSeq* prev = &cache.at(BitString{}).phi;
  for (u64 t = 0; t <= k; ++t) {
    const FinSeq& cur = cache.at(bd.path.prefix(t + 1)).phi;
    bd.blocks.push_back(cur.suffix_after(*prev));
    prev = &cur;
  }
  return bd;
}

inline BlockDecomposition f_blocks(ConstructionCache& cache,
                                   const AlphaSpec& spec, u64 k) {
  return f_blocks(cache, [&spec](u64 n) { return alpha_bit(spec, n); }, k);
}

inline PrefixCertificate prefix_certificate(const BlockDecomposition& bd) {
  return {bd.prefix(), bd.k,
          std::ldexp(1.0, -static_cast<int>(bd.k + 1)), bd.q};
}

/// delta * f: entries scale by delta, q-powers by delta^q.
inline PrefixCertificate scale_prefix(const PrefixCertificate& pc, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidInput("scaling factor must be finite and > 0");
  }
  return {pc.prefix.scaled(delta), pc.blocks_used,
          pc.tail_q_bound * std::pow(delta, pc.q), pc.q};
}

/// Each block under 2^{-(t+1)} in q-power, hence the prefix in the unit ball.
inline CheckReport unit_ball_check(const BlockDecomposition& bd, Margin m = {}) {
  CheckReport report;
  const Exponent q(bd.q);
  double total_hi = 0.0;
  double allowance = 0.0;
  for (std::size_t t = 0; t < bd.blocks.size(); ++t) {
    const double hi = power_sum(bd.blocks[t], q, SumRoute::reference).hi;
    const double bound = std::ldexp(1.0, -static_cast<int>(t + 1));
    report.add("block " + std::to_string(t), hi, "<", bound,
               certified_less(hi, bound, m));
    total_hi += hi;
    allowance += bound;
  }
  const double prefix_hi = power_sum(bd.prefix(), q, SumRoute::reference).hi;
  report.add("block sum", total_hi, "<=", allowance, total_hi <= allowance);
  report.add("unit ball", prefix_hi, "<=", 1.0, prefix_hi <= 1.0);
  return report;
}

inline double prefix_q_power(const PrefixCertificate& pc) {
  return power_sum(pc.prefix, Exponent(pc.q), SumRoute::reference).hi;
}

/// Two points agreeing on alpha(0..agree_to) are mapped close together:
/// the truncated distance after agree_to + k_extra blocks is at most
/// 2 * 2^{-(k+1)/q} (q >= 1, norm) or 2 * 2^{-(k+1)} (q < 1, d_q).
inline CheckReport continuity_check(ConstructionCache& cache,
                                    const AlphaSpec& a, const AlphaSpec& b,
                                    u64 agree_to, u64 k_extra) {
  for (u64 n = 0; n <= agree_to; ++n) {
    if (alpha_bit(a, n) != alpha_bit(b, n)) {
      throw DomainError("points differ at index " + std::to_string(n) +
                        " <= " + std::to_string(agree_to));
    }
  }
  const u64 k = agree_to + k_extra;
  const BlockDecomposition ba = f_blocks(cache, a, k);
  const BlockDecomposition bb = f_blocks(cache, b, k);
  const double q = cache.ladder().q();
  CheckReport report;

  bool same = true;
  for (u64 t = 0; t <= agree_to; ++t) same = same && ba.blocks[t] == bb.blocks[t];
  report.add("shared blocks", same ? 1.0 : 0.0, "==", 1.0, same);

  FinSeq shared;
  for (u64 t = 0; t <= agree_to; ++t) shared.append(ba.blocks[t]);
  const FinSeq ra = ba.prefix().suffix_after(shared);
  const FinSeq rb = bb.prefix().suffix_after(shared);

  double power = 0.0;
  std::string method = "pointwise";
  try {
    power = power_distance(ra, rb, Exponent(q));
  } catch (const ResourceLimit&) {
    // Triangle inequality on the remainders, which start at the same index.
    const double sa = power_sum(ra, Exponent(q), SumRoute::reference).hi;
    const double sb = power_sum(rb, Exponent(q), SumRoute::reference).hi;
    power = q >= 1.0 ? std::pow(std::pow(sa, 1.0 / q) + std::pow(sb, 1.0 / q), q)
                     : sa + sb;
    method = "triangle";
  }
  const double scale = std::ldexp(1.0, -static_cast<int>(agree_to + 1));
  if (q >= 1.0) {
    const double dist = std::pow(power, 1.0 / q);
    const double bound = 2.0 * std::pow(scale, 1.0 / q);
    report.add("distance", dist, "<=", bound, dist <= bound, method);
  } else {
    const double bound = 2.0 * scale;
    report.add("distance", power, "<=", bound, power <= bound, method);
  }
  return report;
}

struct DivergenceResult {
  /// Length of (alpha(0), ..., alpha(n)) ending at the deciding 1-bit.
  u64 prefix_len = 0;
  /// Index <row, j> of that 1-bit.
  u64 one_index = 0;
  double phi_length = 0.0;
  /// Certified lower bound of the p_row-power sum of phi at that prefix.
  double norm_value = 0.0;
  FinSeq prefix;
};

/// Follows the ones of an infinite row until the p_row-power sum of the
/// prefix exceeds target.
inline DivergenceResult divergence_witness(ConstructionCache& cache,
                                           const AlphaSpec& spec, u64 row,
                                           double target,
                                           double scale = 1.0) {
  const auto it = spec.rows.find(row);
  if (it == spec.rows.end() || std::holds_alternative<FiniteOnes>(it->second)) {
    throw DomainError("row " + std::to_string(row) + " has finitely many ones");
  }
  const Exponent p(cache.ladder().p(row));
  double best = 0.0;
  for (u64 j = 0;; ++j) {
    if (!pattern_bit(it->second, j)) continue;
    const u64 n = pair(row, j);
    const BitString sigma = alpha_prefix(spec, n + 1);
    const Node* node = nullptr;
    try {
      node = &cache.build(sigma);
    } catch (const ResourceLimit& e) {
      throw ResourceLimit(std::string(e.what()) + "; p_" + std::to_string(row) +
                              " sum reached " + format_double(best),
                          best);
    }
    const FinSeq prefix = scale == 1.0 ? node->phi : node->phi.scaled(scale);
    best = power_sum(prefix, p, SumRoute::reference).lo;
    if (best > target) {
      return {n + 1, n, prefix.length(), best, prefix};
    }
  }
}

/// For alpha in P3: past sigma_0 = (alpha(0..<i,j0>)) every cap M_i along
/// alpha equals M_i(sigma_0) and bounds the p_i-power sums.
inline CheckReport stabilization_check(ConstructionCache& cache,
                                       const AlphaSpec& spec, u64 i, u64 max_k,
                                       Margin m = {}) {
  if (!in_P3(spec)) throw DomainError("stabilization needs a point of P3");
  u64 j0 = 0;
  for (const auto& [row, pattern] : spec.rows) {
    const auto& cols = std::get<FiniteOnes>(pattern).cols;
    if (row <= i && !cols.empty()) j0 = std::max(j0, *cols.rbegin() + 1);
  }
  const u64 n0 = pair(i, j0);
  CheckReport report;
  report.add("window", static_cast<double>(n0), "<=",
             static_cast<double>(max_k), n0 <= max_k,
             "sigma_0 ends at <" + std::to_string(i) + "," + std::to_string(j0) + ">");
  if (n0 > max_k) return report;

  cache.build(alpha_prefix(spec, max_k + 1));
  const u64 cap = cache.at(alpha_prefix(spec, n0 + 1)).caps.at(i);
  const Exponent p(cache.ladder().p(i));
  for (u64 k = n0; k <= max_k; ++k) {
    const Node& node = cache.at(alpha_prefix(spec, k + 1));
    const std::string at = "k=" + std::to_string(k);
    const u64 mine = node.caps.at(i);
    report.add("cap " + at, static_cast<double>(mine), "==",
               static_cast<double>(cap), mine == cap);
    const double hi = power_sum(node.phi, p, SumRoute::reference).hi;
    report.add("bounded " + at, hi, "<", static_cast<double>(cap),
               certified_less(hi, static_cast<double>(cap), m));
  }
  return report;
}

// --------------------------------------------------------------------------
// Export

/// Columns: k, bit, block_len, q_power, p0_power..., cum_q, cum_p0...
/// Powers are certified upper bounds at full precision.
inline void write_trace_csv(std::ostream& out, const BlockDecomposition& bd,
                            const ExpLadder& ladder, std::size_t rows) {
  out << "k,bit,block_len,q_power";
  for (std::size_t i = 0; i < rows; ++i) out << ",p" << i << "_power";
  out << ",cum_q";
  for (std::size_t i = 0; i < rows; ++i) out << ",cum_p" << i;
  out << '\n';
  const Exponent q(bd.q);
  FinSeq cum;
  for (std::size_t t = 0; t < bd.blocks.size(); ++t) {
    const FinSeq& u = bd.blocks[t];
    cum.append(u);
    out << t << ',' << bd.path[t] << ',' << format_double(u.length()) << ','
        << format_double(power_sum(u, q, SumRoute::reference).hi);
    for (std::size_t i = 0; i < rows; ++i) {
      out << ',' << format_double(
                        power_sum(u, Exponent(ladder.p(i)), SumRoute::reference).hi);
    }
    out << ',' << format_double(power_sum(cum, q, SumRoute::reference).hi);
    for (std::size_t i = 0; i < rows; ++i) {
      out << ',' << format_double(
                        power_sum(cum, Exponent(ladder.p(i)), SumRoute::reference).hi);
    }
    out << '\n';
  }
}

inline constexpr std::size_t kPrefixExportLimit = 100000;

/// Segment summary as '#' lines, then the leading entries one per line.
inline void write_prefix(std::ostream& out, const FinSeq& x,
                         std::size_t limit = kPrefixExportLimit) {
  out << "# length " << format_double(x.length()) << '\n';
  for (const auto& seg : x.segments()) {
    if (const auto* b = std::get_if<ValueBlock>(&seg)) {
      out << "# values " << b->values.size() << '\n';
    } else {
      const auto& r = std::get<PowerRun>(seg);
      out << "# run " << format_double(r.first) << ' ' << format_double(r.last)
          << ' ' << format_double(r.bottom) << ' ' << format_double(r.scale)
          << '\n';
    }
  }
  const auto values = x.leading_values(limit);
  if (static_cast<double>(values.size()) < x.length()) {
    out << "# first " << values.size() << " entries\n";
  }
  for (double v : values) out << format_double(v) << '\n';
}

}  // namespace lprl
