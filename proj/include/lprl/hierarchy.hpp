#pragma once

// Double sequences under the diagonal enumeration, row extraction, the
// embedding inequalities into c_0, l^inf and intersections above b, and
// finite certificates for the countable product of reductions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "lprl/construction.hpp"
#include "lprl/error.hpp"
#include "lprl/grid.hpp"
#include "lprl/ladder.hpp"
#include "lprl/numeric.hpp"
#include "lprl/reduction.hpp"
#include "lprl/report.hpp"
#include "lprl/seqspace.hpp"

namespace lprl {

/// x_{m,t} stored at flat index <m,t>.
struct DoubleSeq {
  FinSeq flat;
};

/// (x_{m,t}) over all t with <m,t> < lh(flat).
inline FinSeq extract_row(const DoubleSeq& d, u64 m) {
  const double len = d.flat.length();
  std::vector<u64> idx;
  for (u64 t = 0;; ++t) {
    const double n = static_cast<double>(pair(m, t));
    if (!(n < len)) break;
    idx.push_back(static_cast<u64>(n));
  }
  if (idx.empty()) return {};
  const auto values = d.flat.leading_values(idx.back() + 1);
  std::vector<double> out;
  out.reserve(idx.size());
  for (u64 n : idx) out.push_back(values[n]);
  return FinSeq(std::move(out));
}

/// flat(<m,t>) = rows[m](t) where defined and 0 elsewhere, for indices < upto.
inline DoubleSeq interleave(const std::vector<FinSeq>& rows, u64 upto) {
  std::vector<std::vector<double>> heads(rows.size());
  for (std::size_t m = 0; m < rows.size(); ++m) {
    std::size_t need = 0;
    while (pair(m, need) < upto) ++need;
    heads[m] = rows[m].leading_values(need);
  }
  std::vector<double> flat(upto, 0.0);
  for (u64 n = 0; n < upto; ++n) {
    const auto [m, t] = unpair(n);
    if (m < heads.size() && t < heads[m].size()) flat[n] = heads[m][t];
  }
  return {FinSeq(std::move(flat))};
}

namespace detail {

inline constexpr double kSubsumSlack = 1e-12;

inline double explicit_power_sum(const std::vector<double>& v, double p) {
  CompensatedSum s;
  for (double x : v) s.add(std::pow(std::fabs(x), p));
  return s.value();
}

inline double sup_abs(const std::vector<double>& v) {
  double out = 0.0;
  for (double x : v) out = std::max(out, std::fabs(x));
  return out;
}

}  // namespace detail

/// Row m of x - y against the whole of x - y, in q-power and in sup norm.
inline CheckReport lipschitz_check(const DoubleSeq& x, const DoubleSeq& y,
                                   u64 m, const std::vector<double>& qs) {
  const auto whole = difference(x.flat, y.flat).values();
  const auto row = difference(extract_row(x, m), extract_row(y, m)).values();
  CheckReport report;
  for (double q : qs) {
    static_cast<void>(Exponent(q));
    const double lhs = detail::explicit_power_sum(row, q);
    const double rhs = detail::explicit_power_sum(whole, q);
    report.add("row " + std::to_string(m) + " q=" + format_double(q), lhs,
               "<=", rhs, lhs <= rhs * (1.0 + detail::kSubsumSlack));
  }
  const double lhs = detail::sup_abs(row);
  const double rhs = detail::sup_abs(whole);
  report.add("row " + std::to_string(m) + " sup", lhs, "<=", rhs, lhs <= rhs);
  return report;
}

/// For b >= 1: ||x-y||_inf <= ||x-y||_b and d_{>b}(x,y) <= ||x-y||_b.
/// For b < 1: ||x-y||_inf <= d_b(x,y)^{1/b}, and when d_b(x,y) < 1 also
/// d_{>b}(x,y) <= d_b(x,y). The ladder must sit above b (ladder.a() == b).
/// The Frechet value is truncated to `terms` terms, which only lowers it.
inline CheckReport embedding_inequality_check(const FinSeq& x, const FinSeq& y,
                                              Exponent b,
                                              const ExpLadder& ladder,
                                              std::size_t terms) {
  if (ladder.a() != b.value()) {
    throw InvalidInput("embedding check needs a ladder with a = b");
  }
  const double power = power_distance(x, y, b);
  const double sup = detail::sup_abs(difference(x, y).values());
  const double slack = 1.0 + detail::kSubsumSlack;
  CheckReport report;

  const double lb = b.value() >= 1.0 ? std::pow(power, 1.0 / b.value())
                                     : power;
  const double sup_bound = std::pow(power, 1.0 / b.value());
  report.add("sup", sup, "<=", sup_bound, sup <= sup_bound * slack);

  if (b.value() >= 1.0 || power < 1.0) {
    const FrechetValue fr = frechet_metric(x, y, ladder, terms);
    report.add("frechet", fr.value, "<=", lb, fr.value <= lb * slack,
               "truncated to " + std::to_string(terms) + " terms, tail < " +
                   format_double(fr.tail_bound));
  }
  return report;
}

// --------------------------------------------------------------------------
// Countable products of reductions

struct Pi4Certificate {
  /// Component m, scaled so that its q-power (tail included) is <= 2^{-m}.
  std::vector<PrefixCertificate> components;
  std::vector<double> scalings;
  /// Certified upper bounds of the scaled components' full q-power.
  std::vector<double> q_power_bounds;
  /// Component m lies outside the intersection (its point is not in P3).
  std::vector<bool> outside_intersection;
  /// Leading window of the interleaved double sequence.
  DoubleSeq interleaved;

  /// Every component outside the intersection. Components past the listed
  /// ones are zero, which lies inside, so a finite list never qualifies.
  bool in_B() const { return false; }
  /// Some component outside the intersection.
  bool some_component_outside() const {
    return std::any_of(outside_intersection.begin(), outside_intersection.end(),
                       [](bool b) { return b; });
  }
};

inline constexpr u64 kDefaultInterleaveWindow = 4096;

inline Pi4Certificate build_pi4_certificate(ConstructionCache& cache,
                                            const std::vector<AlphaSpec>& specs,
                                            u64 k,
                                            u64 window = kDefaultInterleaveWindow) {
  Pi4Certificate cert;
  const double q = cache.ladder().q();
  std::vector<FinSeq> rows;
  for (std::size_t m = 0; m < specs.size(); ++m) {
    const PrefixCertificate pc = prefix_certificate(f_blocks(cache, specs[m], k));
    const double full = prefix_q_power(pc) + pc.tail_q_bound;
    const double goal = std::ldexp(1.0, -static_cast<int>(m));
    double delta = 1.0;
    if (full > goal) {
      delta = std::pow(goal / full, 1.0 / q) * (1.0 - 1e-9);
    }
    PrefixCertificate scaled = delta == 1.0 ? pc : scale_prefix(pc, delta);
    cert.q_power_bounds.push_back(prefix_q_power(scaled) + scaled.tail_q_bound);
    cert.scalings.push_back(delta);
    cert.outside_intersection.push_back(!in_P3(specs[m]));
    rows.push_back(scaled.prefix);
    cert.components.push_back(std::move(scaled));
  }
  cert.interleaved = interleave(rows, window);
  return cert;
}

inline CheckReport check_pi4_certificate(const Pi4Certificate& cert) {
  CheckReport report;
  for (std::size_t m = 0; m < cert.components.size(); ++m) {
    const double bound = std::ldexp(1.0, -static_cast<int>(m));
    const double v = cert.q_power_bounds[m];
    report.add("component " + std::to_string(m), v, "<=", bound, v <= bound);
    const auto row = extract_row(cert.interleaved, m).values();
    auto head = cert.components[m].prefix.leading_values(row.size());
    head.resize(row.size(), 0.0);
    report.add("row " + std::to_string(m) + " round trip", 0.0, "==", 0.0,
               row == head);
  }
  return report;
}

inline void write_pi4_certificate(std::ostream& out, const Pi4Certificate& cert) {
  out << "lprl-pi4 1\n";
  out << "components " << cert.components.size() << '\n';
  for (std::size_t m = 0; m < cert.components.size(); ++m) {
    const auto& c = cert.components[m];
    out << "component " << m << '\n';
    out << "scaling " << format_double(cert.scalings[m]) << '\n';
    out << "q_power_bound " << format_double(cert.q_power_bounds[m]) << '\n';
    out << "outside " << (cert.outside_intersection[m] ? 1 : 0) << '\n';
    out << "blocks " << c.blocks_used + 1 << '\n';
    out << "tail " << format_double(c.tail_q_bound) << '\n';
    write_finseq(out, c.prefix);
  }
  out << "window " << format_double(cert.interleaved.flat.length()) << '\n';
  out << "end\n";
}

}  // namespace lprl
