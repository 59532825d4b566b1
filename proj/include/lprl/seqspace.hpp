#pragma once

// Finite real sequences and the l^p machinery on them: p-th power sums,
// the metrics d_p and d_{>b}, the sup norm and margin-certified strict
// comparisons. A finite sequence is identified with its zero padding in
// every binary operation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lprl/error.hpp"
#include "lprl/ladder.hpp"
#include "lprl/numeric.hpp"

namespace lprl {

/// Explicitly stored entries.
struct ValueBlock {
  std::vector<double> values;
  friend bool operator==(const ValueBlock&, const ValueBlock&) = default;
};

/// The entries scale * (n+1)^{-1/bottom} for n = first, ..., last.
///
/// first and last are integer-valued doubles; they routinely exceed 2^64.
struct PowerRun {
  double first = 0.0;
  double last = 0.0;
  double bottom = 1.0;
  double scale = 1.0;

  double length() const { return last - first + 1.0; }
  double entry(double n) const {
    return scale * std::pow(n + 1.0, -1.0 / bottom);
  }
  friend bool operator==(const PowerRun&, const PowerRun&) = default;
};

using Segment = std::variant<ValueBlock, PowerRun>;

inline double segment_length(const Segment& s) {
  if (const auto* block = std::get_if<ValueBlock>(&s)) {
    return static_cast<double>(block->values.size());
  }
  return std::get<PowerRun>(s).length();
}

/// Largest sequence that `FinSeq::values()` will materialize by default.
inline constexpr std::size_t kMaterializeLimit = std::size_t{1} << 24;

/// A finite sequence of reals stored as a list of segments.
///
/// Adjacent value blocks are merged and empty segments dropped, so two
/// sequences built by the same operations compare equal. Equality is
/// structural; compare `values()` for entrywise equality of explicit data.
class FinSeq {
 public:
  FinSeq() = default;
  FinSeq(std::initializer_list<double> values)
      : FinSeq(std::vector<double>(values)) {}
  explicit FinSeq(std::vector<double> values) {
    append_segment(ValueBlock{std::move(values)});
  }

  static FinSeq run(double first, double last, double bottom,
                    double scale = 1.0) {
    if (!(first >= 0.0) || !(last >= first) || !std::isfinite(last) ||
        std::floor(first) != first || std::floor(last) != last) {
      throw InvalidInput("power run needs integer 0 <= first <= last");
    }
    if (!(bottom > 0.0) || !std::isfinite(bottom) || !(scale >= 0.0) ||
        !std::isfinite(scale)) {
      throw InvalidInput("power run needs bottom > 0 and scale >= 0");
    }
    FinSeq out;
    out.append_segment(PowerRun{first, last, bottom, scale});
    return out;
  }

  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }

  double length() const {
    double total = 0.0;
    for (const auto& s : segments_) total += segment_length(s);
    return total;
  }

  bool is_explicit() const {
    return std::all_of(segments_.begin(), segments_.end(), [](const auto& s) {
      return std::holds_alternative<ValueBlock>(s);
    });
  }

  /// All entries; throws ResourceLimit if there are more than `limit`.
  std::vector<double> values(std::size_t limit = kMaterializeLimit) const {
    const double len = length();
    if (len > static_cast<double>(limit)) {
      throw ResourceLimit("sequence of length " + format_double(len) +
                              " exceeds materialization limit",
                          len);
    }
    return leading_values(static_cast<std::size_t>(len));
  }

  /// The first min(count, length) entries.
  std::vector<double> leading_values(std::size_t count) const {
    std::vector<double> out;
    for (const auto& s : segments_) {
      if (out.size() >= count) break;
      if (const auto* block = std::get_if<ValueBlock>(&s)) {
        const std::size_t take =
            std::min(count - out.size(), block->values.size());
        out.insert(out.end(), block->values.begin(),
                   block->values.begin() + static_cast<std::ptrdiff_t>(take));
      } else {
        const auto& r = std::get<PowerRun>(s);
        for (double n = r.first; n <= r.last && out.size() < count; n += 1.0) {
          out.push_back(r.entry(n));
        }
      }
    }
    return out;
  }

  FinSeq& append(const FinSeq& tail) {
    for (const auto& s : tail.segments_) append_segment(s);
    return *this;
  }

  FinSeq& push_back(double value) {
    append_segment(ValueBlock{{value}});
    return *this;
  }

  /// True when `prefix` is an initial segment of *this at the segment level
  /// (a trailing value block of `prefix` may be a prefix of ours).
  bool starts_with(const FinSeq& prefix) const {
    return split_after(prefix).first;
  }

  /// The entries of *this after the initial segment `prefix`.
  FinSeq suffix_after(const FinSeq& prefix) const {
    auto [ok, rest] = split_after(prefix);
    if (!ok) throw PreconditionError("sequence does not extend the prefix");
    return rest;
  }

  /// Entrywise multiplication by factor >= 0.
  FinSeq scaled(double factor) const {
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
      throw InvalidInput("scale factor must be finite and >= 0");
    }
    FinSeq out;
    for (const auto& s : segments_) {
      if (const auto* block = std::get_if<ValueBlock>(&s)) {
        ValueBlock b = *block;
        for (double& v : b.values) v *= factor;
        out.append_segment(std::move(b));
      } else {
        PowerRun r = std::get<PowerRun>(s);
        r.scale *= factor;
        out.append_segment(r);
      }
    }
    return out;
  }

  friend bool operator==(const FinSeq&, const FinSeq&) = default;

 private:
  void append_segment(Segment s) {
    if (segment_length(s) == 0.0) return;
    if (!segments_.empty()) {
      auto* last = std::get_if<ValueBlock>(&segments_.back());
      const auto* next = std::get_if<ValueBlock>(&s);
      if (last && next) {
        last->values.insert(last->values.end(), next->values.begin(),
                            next->values.end());
        return;
      }
    }
    segments_.push_back(std::move(s));
  }

  std::pair<bool, FinSeq> split_after(const FinSeq& prefix) const {
    const auto& ps = prefix.segments_;
    if (ps.size() > segments_.size()) return {false, {}};
    std::size_t i = 0;
    for (; i + 1 < ps.size(); ++i) {
      if (!(ps[i] == segments_[i])) return {false, {}};
    }
    FinSeq rest;
    if (!ps.empty()) {
      const auto& mine = segments_[i];
      if (ps[i] == mine) {
        // exact segment match
      } else {
        const auto* pb = std::get_if<ValueBlock>(&ps[i]);
        const auto* mb = std::get_if<ValueBlock>(&mine);
        if (!pb || !mb || pb->values.size() > mb->values.size() ||
            !std::equal(pb->values.begin(), pb->values.end(),
                        mb->values.begin())) {
          return {false, {}};
        }
        rest.append_segment(ValueBlock{std::vector<double>(
            mb->values.begin() +
                static_cast<std::ptrdiff_t>(pb->values.size()),
            mb->values.end())});
      }
      ++i;
    }
    for (; i < segments_.size(); ++i) rest.append_segment(segments_[i]);
    return {true, std::move(rest)};
  }

  std::vector<Segment> segments_;
};

inline FinSeq concat(const FinSeq& u, const FinSeq& v) {
  FinSeq out = u;
  out.append(v);
  return out;
}

// --------------------------------------------------------------------------
// Margins

inline constexpr double kDefaultEta = 0x1p-20;

/// Slack used to certify strict inequalities under floating point.
struct Margin {
  double eta = kDefaultEta;

  Margin() = default;
  explicit Margin(double value) : eta(value) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw InvalidInput("margin must be finite and >= 0");
    }
  }
};

/// lhs < rhs with room to spare: lhs + eta < rhs.
inline bool certified_less(double lhs, double rhs, Margin m) {
  return lhs + m.eta < rhs;
}

// --------------------------------------------------------------------------
// Power sums

/// analytic: the construction route (short direct head + Euler-Maclaurin).
/// reference: the verification route (materialize short runs, otherwise a
/// long direct head + Euler-Maclaurin).
enum class SumRoute { analytic, reference };

namespace detail {

inline constexpr std::size_t kAnalyticHead = 32;
inline constexpr std::size_t kReferenceHead = 1024;
inline constexpr double kReferenceDirectLimit = 4096;
inline constexpr double kUnderflowGuard = 1e-280;

inline Bounds value_block_power_sum(const ValueBlock& block, double p) {
  CompensatedSum sum;
  std::size_t tiny = 0;  // terms that may have lost bits to underflow
  for (double x : block.values) {
    if (!std::isfinite(x)) throw InvalidInput("non-finite sequence entry");
    const double term = std::pow(std::fabs(x), p);
    if (x != 0.0 && term < 0x1p-960) ++tiny;
    sum.add(term);
  }
  const double v = sum.value();
  const double slack =
      kRelativeSlack * v +
      static_cast<double>(tiny) * std::numeric_limits<double>::min();
  return {std::max(0.0, v - slack), v + slack};
}

inline Bounds run_power_sum(const PowerRun& r, double p, SumRoute route) {
  if (r.scale == 0.0) return {0.0, 0.0};
  if (route == SumRoute::reference && r.length() <= kReferenceDirectLimit &&
      r.last < kExactIndexLimit && r.entry(r.last) > kUnderflowGuard) {
    ValueBlock block;
    for (double n = r.first; n <= r.last; n += 1.0) {
      block.values.push_back(r.entry(n));
    }
    return value_block_power_sum(block, p);
  }
  const std::size_t head =
      route == SumRoute::analytic ? kAnalyticHead : kReferenceHead;
  return enclose_power_range(r.first, r.last, p / r.bottom, head)
      .scaled(std::pow(r.scale, p));
}

}  // namespace detail

inline Bounds segment_power_sum(const Segment& s, Exponent p,
                                SumRoute route = SumRoute::analytic) {
  if (const auto* block = std::get_if<ValueBlock>(&s)) {
    return detail::value_block_power_sum(*block, p.value());
  }
  return detail::run_power_sum(std::get<PowerRun>(s), p.value(), route);
}

/// Enclosure of sum_n |x(n)|^p.
inline Bounds power_sum(const FinSeq& x, Exponent p,
                        SumRoute route = SumRoute::analytic) {
  Bounds total;
  for (const auto& s : x.segments()) total += segment_power_sum(s, p, route);
  return total;
}

/// sum_n |x(n)|^p (midpoint of the certified enclosure).
inline double pnorm_pow(const FinSeq& x, Exponent p) {
  return power_sum(x, p).mid();
}

/// max_n |x(n)|, 0 for the empty sequence.
inline double sup_norm(const FinSeq& x) {
  double best = 0.0;
  for (const auto& s : x.segments()) {
    if (const auto* block = std::get_if<ValueBlock>(&s)) {
      for (double v : block->values) best = std::max(best, std::fabs(v));
    } else {
      const auto& r = std::get<PowerRun>(s);
      best = std::max(best, r.entry(r.first));
    }
  }
  return best;
}

// --------------------------------------------------------------------------
// Distances

/// Sequential reader over the entries of a FinSeq.
class EntryCursor {
 public:
  explicit EntryCursor(const FinSeq& seq, std::size_t first_segment = 0)
      : segments_(&seq.segments()), segment_(first_segment) {}

  bool done() const { return segment_ >= segments_->size(); }

  /// Next entry, or 0 once the sequence is exhausted (zero padding).
  double next() {
    if (done()) return 0.0;
    const Segment& s = (*segments_)[segment_];
    double value;
    if (const auto* block = std::get_if<ValueBlock>(&s)) {
      value = block->values[static_cast<std::size_t>(offset_)];
    } else {
      const auto& r = std::get<PowerRun>(s);
      value = r.entry(r.first + offset_);
    }
    offset_ += 1.0;
    if (offset_ >= segment_length(s)) {
      ++segment_;
      offset_ = 0.0;
    }
    return value;
  }

 private:
  const std::vector<Segment>* segments_;
  std::size_t segment_;
  double offset_ = 0.0;
};

/// Largest number of positions `power_distance` will stream through.
inline constexpr double kStreamLimit = 0x1p25;

/// sum_n |x(n) - y(n)|^p over the zero-padded sequences.
///
/// Identical leading segments contribute nothing and are skipped. When one
/// remainder is empty the other's power sum is used; otherwise the
/// remainders are streamed entry by entry (at most `limit` positions).
inline double power_distance(const FinSeq& x, const FinSeq& y, Exponent p,
                             double limit = kStreamLimit) {
  const auto& xs = x.segments();
  const auto& ys = y.segments();
  std::size_t shared = 0;
  while (shared < xs.size() && shared < ys.size() &&
         xs[shared] == ys[shared]) {
    ++shared;
  }
  double x_rest = 0.0, y_rest = 0.0;
  for (std::size_t i = shared; i < xs.size(); ++i) x_rest += segment_length(xs[i]);
  for (std::size_t i = shared; i < ys.size(); ++i) y_rest += segment_length(ys[i]);

  auto tail_sum = [&](const std::vector<Segment>& segs) {
    Bounds b;
    for (std::size_t i = shared; i < segs.size(); ++i) {
      b += segment_power_sum(segs[i], p);
    }
    return b.mid();
  };
  if (x_rest == 0.0) return tail_sum(ys);
  if (y_rest == 0.0) return tail_sum(xs);

  const double positions = std::max(x_rest, y_rest);
  if (positions > limit) {
    throw ResourceLimit("pointwise distance over " + format_double(positions) +
                            " positions exceeds stream limit",
                        positions);
  }
  EntryCursor cx(x, shared), cy(y, shared);
  CompensatedSum sum;
  for (double n = 0.0; n < positions; n += 1.0) {
    const double a = cx.next();
    const double b = cy.next();
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw InvalidInput("non-finite sequence entry");
    }
    sum.add(std::pow(std::fabs(a - b), p.value()));
  }
  return sum.value();
}

/// d_p(x, y) = sum |x_n - y_n|^p for 0 < p < 1.
inline double dp_metric(const FinSeq& x, const FinSeq& y, Exponent p) {
  if (p.value() >= 1.0) {
    throw DomainError("d_p is defined for 0 < p < 1; use the p-norm");
  }
  return power_distance(x, y, p);
}

/// Entrywise x - y of two explicit sequences (zero padded).
inline FinSeq difference(const FinSeq& x, const FinSeq& y) {
  const auto xv = x.values();
  const auto yv = y.values();
  std::vector<double> out(std::max(xv.size(), yv.size()), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (i < xv.size() ? xv[i] : 0.0) - (i < yv.size() ? yv[i] : 0.0);
  }
  return FinSeq(std::move(out));
}

struct FrechetValue {
  double value = 0.0;
  /// The omitted terms i >= terms sum to less than this.
  double tail_bound = 0.0;
};

/// Truncation of d_{>b}(x, y) = sum_i 2^{-(i+1)} t_i / (1 + t_i) to its first
/// `terms` terms, where b = ladder.a() and t_i is ||x-y||_{p_i} for b >= 1 or
/// d_{p_i}(x, y) for b < 1.
inline FrechetValue frechet_metric(const FinSeq& x, const FinSeq& y,
                                   const ExpLadder& ladder, std::size_t terms) {
  if (terms == 0) throw InvalidInput("frechet_metric needs terms >= 1");
  const double b = ladder.a();
  if (b < 1.0 && !(ladder.p(0) < 1.0)) {
    throw InvalidInput("ladder for b < 1 needs p_0 < 1");
  }
  CompensatedSum sum;
  for (std::size_t i = 0; i < terms; ++i) {
    const double p = ladder.p(i);
    const double d = power_distance(x, y, Exponent(p));
    const double t = b >= 1.0 ? std::pow(d, 1.0 / p) : d;
    sum.add(std::ldexp(t / (1.0 + t), -static_cast<int>(i + 1)));
  }
  return {sum.value(), std::ldexp(1.0, -static_cast<int>(terms))};
}

}  // namespace lprl
