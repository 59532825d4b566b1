#pragma once

// The recursion sigma |-> (phi(sigma), psi(sigma)) over finite binary
// strings, memoized in a ConstructionCache.
//
//   phi(empty) = psi(empty) = empty.
//   tau = sigma^(0): phi(tau) = phi(sigma)^(0); caps are copied, and a new
//     cap is opened when the depth grows (M_0((0)) = 1).
//   tau = sigma^(1): phi(tau) = phi(sigma)^v where v is a witness with caps
//     M_0..M_{l(tau)-1}(sigma), target lh(sigma)+1 at p_{l(tau)} and q-budget
//     2^{-(lh(sigma)+1)}; caps below l(tau) are kept, the rest recomputed.
//
// Recomputed caps are the least natural above the certified power sum.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lprl/error.hpp"
#include "lprl/grid.hpp"
#include "lprl/ladder.hpp"
#include "lprl/numeric.hpp"
#include "lprl/seqspace.hpp"
#include "lprl/witness.hpp"

namespace lprl {

struct Node {
  BitString sigma;
  FinSeq phi;
  /// psi(sigma) = (M_0, ..., M_{d(sigma)}).
  std::vector<u64> caps;
};

/// floor(hi + eta) + 1: strictly above the enclosure with margin to spare.
inline u64 least_natural_above(const Bounds& b, Margin m) {
  const double y = b.hi + m.eta;
  if (!(y < 0x1p53)) throw OverflowError("cap exceeds exactly representable range");
  return static_cast<u64>(std::floor(y)) + 1;
}

struct CacheStats {
  std::size_t nodes = 0;
  std::size_t segments = 0;
  double max_phi_length = 0.0;
  std::size_t approx_bytes = 0;
};

/// Memoized construction tree. Nodes are only ever added, and references
/// returned by build()/at() stay valid for the lifetime of the cache.
/// Populate first, then share read-only across threads.
class ConstructionCache {
 public:
  explicit ConstructionCache(ExpLadder ladder, Margin margin = {},
                             std::uint64_t step_budget = kDefaultStepBudget)
      : ladder_(std::move(ladder)), margin_(margin), step_budget_(step_budget) {
    nodes_.emplace(BitString{}, Node{});
  }

  const ExpLadder& ladder() const { return ladder_; }
  Margin margin() const { return margin_; }
  std::uint64_t step_budget() const { return step_budget_; }

  const Node& build(const BitString& sigma) {
    const Node* node = &nodes_.at(BitString{});
    for (std::size_t len = 1; len <= sigma.size(); ++len) {
      BitString prefix = sigma.prefix(len);
      auto it = nodes_.find(prefix);
      if (it == nodes_.end()) {
        Node child = extend_node(*node, sigma[len - 1]);
        it = nodes_.emplace(std::move(prefix), std::move(child)).first;
      }
      node = &it->second;
    }
    return *node;
  }

  /// Builds every string of length <= max_len, shortest first.
  void populate(std::size_t max_len) {
    std::vector<BitString> frontier{BitString{}};
    for (std::size_t len = 0; len < max_len; ++len) {
      std::vector<BitString> next;
      next.reserve(frontier.size() * 2);
      for (const auto& s : frontier) {
        for (int bit : {0, 1}) {
          next.push_back(s.extended(bit));
          build(next.back());
        }
      }
      frontier = std::move(next);
    }
  }

  const Node* find(const BitString& sigma) const {
    auto it = nodes_.find(sigma);
    return it == nodes_.end() ? nullptr : &it->second;
  }

  const Node& at(const BitString& sigma) const {
    if (const Node* n = find(sigma)) return *n;
    throw PreconditionError("node " + sigma.to_string() + " is not cached");
  }

  std::size_t size() const { return nodes_.size(); }
  const std::map<BitString, Node>& nodes() const { return nodes_; }

  CacheStats stats() const {
    CacheStats s;
    s.nodes = nodes_.size();
    for (const auto& [sigma, node] : nodes_) {
      s.segments += node.phi.segments().size();
      s.max_phi_length = std::max(s.max_phi_length, node.phi.length());
      s.approx_bytes += sizeof(Node) + sigma.size() +
                        node.caps.size() * sizeof(u64) +
                        node.phi.segments().size() * sizeof(Segment);
      for (const auto& seg : node.phi.segments()) {
        if (const auto* b = std::get_if<ValueBlock>(&seg)) {
          s.approx_bytes += b->values.size() * sizeof(double);
        }
      }
    }
    return s;
  }

  void write(std::ostream& out) const;
  static ConstructionCache read(std::istream& in);

 private:
  Node extend_node(const Node& parent, int bit) const {
    const u64 len = parent.sigma.size();
    const std::int64_t d_sigma = depth_of_length(len);
    const std::int64_t d_tau = depth_of_length(len + 1);
    Node out{parent.sigma.extended(bit), parent.phi, {}};

    if (bit == 0) {
      out.phi.push_back(0.0);
      if (len == 0) {
        out.caps = {1};
      } else {
        out.caps = parent.caps;
        if (d_tau > d_sigma) {
          out.caps.push_back(least_natural_above(
              power_sum(out.phi, ladder_.exponent(static_cast<std::size_t>(d_tau))),
              margin_));
        }
      }
      return out;
    }

    const u64 lvl = level_of_length(len + 1);
    ClaimRequest req;
    req.u = parent.phi;
    req.q = Exponent(ladder_.q());
    for (u64 i = 0; i <= lvl; ++i) req.exps.push_back(ladder_.exponent(i));
    for (u64 i = 0; i < lvl; ++i) {
      req.caps.push_back(static_cast<double>(parent.caps[i]));
    }
    req.target = static_cast<double>(len + 1);
    req.eps = std::ldexp(1.0, -static_cast<int>(len + 1));
    req.step_budget = step_budget_;

    ClaimWitness w;
    try {
      w = extend(req, margin_);
    } catch (const ResourceLimit& e) {
      throw ResourceLimit(std::string(e.what()) + " while building " +
                              out.sigma.to_string(),
                          e.progress());
    }
    out.phi.append(w.v);
    out.caps.assign(parent.caps.begin(),
                    parent.caps.begin() + static_cast<std::ptrdiff_t>(lvl));
    for (std::int64_t i = static_cast<std::int64_t>(lvl); i <= d_tau; ++i) {
      out.caps.push_back(least_natural_above(
          power_sum(out.phi, ladder_.exponent(static_cast<std::size_t>(i))),
          margin_));
    }
    return out;
  }

  ExpLadder ladder_;
  Margin margin_;
  std::uint64_t step_budget_;
  std::map<BitString, Node> nodes_;
};

// --------------------------------------------------------------------------
// Text format
//
//   lprl-cache 1
//   a <a>
//   q <q>
//   ladder default | ladder explicit <n> <p_0> ... <p_{n-1}>
//   eta <eta>
//   step_budget <n>
//   nodes <count>
//   node <bits, or - for the empty string>
//   caps <n> <M_0> ...
//   segments <n>
//   values <n> <x_0> ...            (one line per segment)
//   run <first> <last> <bottom> <scale>
//   end
//
// Reals are written with 17 significant digits, so reading restores them
// exactly. Nodes appear shortest first, then lexicographically.

inline void write_finseq(std::ostream& out, const FinSeq& x) {
  out << "segments " << x.segments().size() << '\n';
  for (const auto& seg : x.segments()) {
    if (const auto* b = std::get_if<ValueBlock>(&seg)) {
      out << "values " << b->values.size();
      for (double v : b->values) out << ' ' << format_double(v);
      out << '\n';
    } else {
      const auto& r = std::get<PowerRun>(seg);
      out << "run " << format_double(r.first) << ' ' << format_double(r.last)
          << ' ' << format_double(r.bottom) << ' ' << format_double(r.scale)
          << '\n';
    }
  }
}

inline void ConstructionCache::write(std::ostream& out) const {
  out << "lprl-cache 1\n";
  out << "a " << format_double(ladder_.a()) << '\n';
  out << "q " << format_double(ladder_.q()) << '\n';
  if (const auto& ex = ladder_.explicit_exponents()) {
    out << "ladder explicit " << ex->size();
    for (double p : *ex) out << ' ' << format_double(p);
    out << '\n';
  } else {
    out << "ladder default\n";
  }
  out << "eta " << format_double(margin_.eta) << '\n';
  out << "step_budget " << step_budget_ << '\n';
  out << "nodes " << nodes_.size() << '\n';
  for (const auto& [sigma, node] : nodes_) {
    out << "node " << (sigma.empty() ? std::string("-") : sigma.to_string())
        << '\n';
    out << "caps " << node.caps.size();
    for (u64 c : node.caps) out << ' ' << c;
    out << '\n';
    write_finseq(out, node.phi);
  }
  out << "end\n";
}

namespace detail {

/// Whitespace tokenizer that remembers line numbers for error messages.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string tok;
    int c;
    while ((c = in_.get()) != EOF && std::isspace(c)) {
      if (c == '\n') ++line_;
    }
    if (c == EOF) throw ParseError("unexpected end of input", line_);
    do {
      tok.push_back(static_cast<char>(c));
    } while ((c = in_.peek()) != EOF && !std::isspace(c) && in_.get());
    return tok;
  }

  void expect(const std::string& keyword) {
    const std::string tok = word();
    if (tok != keyword) {
      throw ParseError("expected '" + keyword + "', found '" + tok + "'", line_);
    }
  }

  double real() {
    const std::string tok = word();
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used == tok.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError("malformed number '" + tok + "'", line_);
  }

  u64 natural() {
    const std::string tok = word();
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(tok, &used);
      if (used == tok.size() && tok[0] != '-') return v;
    } catch (const std::exception&) {
    }
    throw ParseError("malformed natural '" + tok + "'", line_);
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

inline FinSeq read_finseq(TokenReader& r) {
  r.expect("segments");
  const u64 count = r.natural();
  FinSeq out;
  for (u64 k = 0; k < count; ++k) {
    const std::string kind = r.word();
    if (kind == "values") {
      const u64 n = r.natural();
      std::vector<double> v;
      v.reserve(n);
      for (u64 t = 0; t < n; ++t) v.push_back(r.real());
      out.append(FinSeq(std::move(v)));
    } else if (kind == "run") {
      const double first = r.real(), last = r.real();
      const double bottom = r.real(), scale = r.real();
      out.append(FinSeq::run(first, last, bottom, scale));
    } else {
      throw ParseError("unknown segment kind '" + kind + "'", r.line());
    }
  }
  return out;
}

}  // namespace detail

inline ConstructionCache ConstructionCache::read(std::istream& in) {
  detail::TokenReader r(in);
  r.expect("lprl-cache");
  if (r.natural() != 1) throw ParseError("unsupported cache version", r.line());
  r.expect("a");
  const double a = r.real();
  r.expect("q");
  const double q = r.real();
  r.expect("ladder");
  const std::string kind = r.word();
  std::optional<std::vector<double>> explicit_p;
  if (kind == "explicit") {
    const u64 n = r.natural();
    explicit_p.emplace();
    for (u64 k = 0; k < n; ++k) explicit_p->push_back(r.real());
  } else if (kind != "default") {
    throw ParseError("unknown ladder kind '" + kind + "'", r.line());
  }
  r.expect("eta");
  const double eta = r.real();
  r.expect("step_budget");
  const u64 budget = r.natural();

  ConstructionCache cache(
      explicit_p ? ExpLadder(a, q, *explicit_p) : ExpLadder(a, q), Margin(eta),
      budget);
  r.expect("nodes");
  const u64 count = r.natural();
  for (u64 k = 0; k < count; ++k) {
    r.expect("node");
    const std::string bits = r.word();
    Node node;
    node.sigma = bits == "-" ? BitString{} : BitString(bits);
    r.expect("caps");
    const u64 ncaps = r.natural();
    for (u64 t = 0; t < ncaps; ++t) node.caps.push_back(r.natural());
    node.phi = detail::read_finseq(r);
    cache.nodes_.insert_or_assign(node.sigma, std::move(node));
  }
  r.expect("end");
  return cache;
}

// --------------------------------------------------------------------------
// Property sweep

struct PropertyResult {
  int id = 0;
  std::string name;
  std::uint64_t checked = 0;
  std::uint64_t failed = 0;
  /// The first few failing instances.
  std::vector<std::string> failures = {};

  void record(bool pass, const std::string& what) {
    ++checked;
    if (pass) return;
    ++failed;
    if (failures.size() < 20) failures.push_back(what);
  }
};

struct PropertyReport {
  std::size_t max_len = 0;
  std::vector<PropertyResult> properties;

  std::uint64_t total_checked() const {
    std::uint64_t n = 0;
    for (const auto& p : properties) n += p.checked;
    return n;
  }
  std::uint64_t total_failed() const {
    std::uint64_t n = 0;
    for (const auto& p : properties) n += p.failed;
    return n;
  }
  bool ok() const { return total_failed() == 0; }
  const PropertyResult& property(int id) const { return properties.at(id - 1); }
};

/// Checks properties 1-7 on every node of length <= max_len, recomputing
/// every power sum through the reference route.
///
///   1 prefix coherence      phi(sigma') proper initial segment of phi(sigma)
///   2 block cost            ||phi(sigma^s) - phi(sigma)||_q^q < 2^{-(lh+1)}
///   3 cap discipline        ||phi(sigma)||_{p_i}^{p_i} < M_i(sigma)
///   4 zero-extension caps   M_i(sigma^0) = M_i(sigma), i <= d(sigma)
///   5 one-extension caps    M_i(sigma^1) = M_i(sigma), i < l(sigma^1)
///   6 forced growth         ||phi(sigma^1)||_{p_l}^{p_l} > lh(sigma)+1
///   7 bookkeeping           lh(psi(sigma)) = d(sigma)+1, phi non-empty
inline PropertyReport check_properties(const ConstructionCache& cache,
                                       std::size_t max_len) {
  const std::uint64_t expected = (std::uint64_t{1} << (max_len + 1)) - 1;
  std::uint64_t present = 0;
  for (const auto& [sigma, node] : cache.nodes()) {
    if (sigma.size() <= max_len) ++present;
  }
  if (present != expected) {
    throw PreconditionError("cache holds " + std::to_string(present) + " of " +
                            std::to_string(expected) + " nodes up to length " +
                            std::to_string(max_len));
  }

  PropertyReport report;
  report.max_len = max_len;
  const char* names[] = {"prefix coherence",   "block cost",
                         "cap discipline",     "zero-extension caps",
                         "one-extension caps", "forced growth",
                         "bookkeeping"};
  for (int id = 1; id <= 7; ++id) report.properties.push_back({id, names[id - 1]});
  auto prop = [&](int id) -> PropertyResult& { return report.properties[id - 1]; };

  const Margin m = cache.margin();
  const ExpLadder& ladder = cache.ladder();
  const Exponent q(ladder.q());

  // Runs are shared between a node and all its descendants.
  std::map<std::string, Bounds> run_memo;
  auto ref_sum = [&](const FinSeq& x, double p) {
    Bounds total;
    for (std::size_t k = 0; k < x.segments().size(); ++k) {
      const Segment& seg = x.segments()[k];
      if (std::holds_alternative<ValueBlock>(seg)) {
        total += segment_power_sum(seg, Exponent(p), SumRoute::reference);
        continue;
      }
      const auto& r = std::get<PowerRun>(seg);
      std::ostringstream key;
      key << format_double(r.first) << ':' << format_double(r.last) << ':'
          << format_double(r.bottom) << ':' << format_double(r.scale);
      const std::string full = key.str() + '@' + format_double(p);
      auto it = run_memo.find(full);
      if (it == run_memo.end()) {
        it = run_memo
                 .emplace(full, segment_power_sum(seg, Exponent(p),
                                                  SumRoute::reference))
                 .first;
      }
      total += it->second;
    }
    return total;
  };

  for (const auto& [sigma, node] : cache.nodes()) {
    const std::size_t len = sigma.size();
    if (len > max_len) continue;
    const std::string tag = sigma.empty() ? "()" : sigma.to_string();
    const std::int64_t d = depth(sigma);

    // 7
    bool book = node.caps.size() == static_cast<std::size_t>(d + 1);
    if (len > 0) book = book && !node.phi.empty();
    prop(7).record(book, tag + ": caps=" + std::to_string(node.caps.size()) +
                             " depth=" + std::to_string(d));

    // 1
    for (std::size_t k = 0; k < len; ++k) {
      const Node& earlier = cache.at(sigma.prefix(k));
      // Lengths past 2^53 are not exact doubles; strictness is structural.
      const bool ok = node.phi.starts_with(earlier.phi) &&
                      !node.phi.suffix_after(earlier.phi).empty();
      prop(1).record(ok, tag + " over prefix of length " + std::to_string(k));
    }

    if (len > 0) {
      // 2
      const Node& parent = cache.at(sigma.prefix(len - 1));
      const FinSeq block = node.phi.suffix_after(parent.phi);
      const double cost = ref_sum(block, q.value()).hi;
      const double bound = std::ldexp(1.0, -static_cast<int>(len));
      prop(2).record(certified_less(cost, bound, m),
                     tag + ": block q-power " + format_double(cost) +
                         " vs " + format_double(bound));

      // 3
      for (std::int64_t i = 0; i <= d; ++i) {
        const double s =
            ref_sum(node.phi, ladder.p(static_cast<std::size_t>(i))).hi;
        const double cap = static_cast<double>(node.caps[static_cast<std::size_t>(i)]);
        prop(3).record(certified_less(s, cap, m),
                       tag + ": p_" + std::to_string(i) + " sum " +
                           format_double(s) + " vs M=" + format_double(cap));
      }
    }

    if (len + 1 > max_len) continue;
    const Node& zero = cache.at(sigma.extended(0));
    const Node& one = cache.at(sigma.extended(1));
    const u64 lvl = level_of_length(len + 1);

    // 4
    if (len > 0) {
      for (std::int64_t i = 0; i <= d; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        prop(4).record(zero.caps.size() > idx && zero.caps[idx] == node.caps[idx],
                       tag + "0: M_" + std::to_string(i) + " changed");
      }
    }
    // 5
    if (len > 0 && lvl > 0) {
      for (u64 i = 0; i < lvl; ++i) {
        prop(5).record(one.caps.size() > i && one.caps[i] == node.caps[i],
                       tag + "1: M_" + std::to_string(i) + " changed");
      }
    }
    // 6
    const double grown = ref_sum(one.phi, ladder.p(lvl)).lo;
    const double need = static_cast<double>(len + 1);
    prop(6).record(certified_less(need, grown, m),
                   tag + "1: p_" + std::to_string(lvl) + " sum " +
                       format_double(grown) + " vs " + format_double(need));
  }
  return report;
}

}  // namespace lprl
