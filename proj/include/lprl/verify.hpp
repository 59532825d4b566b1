#pragma once

// Verification suites over a construction cache, the fixed corpus of
// Cantor-space points, seeded generators and the machine-readable report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "lprl/config.hpp"
#include "lprl/construction.hpp"
#include "lprl/hierarchy.hpp"
#include "lprl/reduction.hpp"
#include "lprl/report.hpp"
#include "lprl/witness.hpp"

namespace lprl {

// --------------------------------------------------------------------------
// Corpus

struct CorpusEntry {
  std::string text;
  AlphaSpec spec;
};

/// Four points of P3 followed by four points outside it.
inline std::vector<CorpusEntry> standard_corpus() {
  const char* texts[] = {
      "",
      "row=0:finite{0,1};row=1:finite{0}",
      "row=2:finite{0,1};row=3:finite{0,1}",
      "row=1:finite{1};row=4:finite{0,1,2};row=0:finite{}",
      "row=0:eventually(0)",
      "row=1:periodic(0,2,0)",
      "row=0:periodic(1,3,0);row=2:finite{0}",
      "row=2:eventually(1);row=0:finite{1}",
  };
  std::vector<CorpusEntry> out;
  for (const char* t : texts) out.push_back({t, parse_alpha_spec(t)});
  return out;
}

/// The least row with infinitely many ones.
inline u64 first_infinite_row(const AlphaSpec& spec) {
  for (const auto& [row, pattern] : spec.rows) {
    if (!std::holds_alternative<FiniteOnes>(pattern)) return row;
  }
  throw DomainError("point lies in P3");
}

// --------------------------------------------------------------------------
// Generators

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline u64 uniform_int(Rng& rng, u64 lo, u64 hi) {
  return std::uniform_int_distribution<u64>(lo, hi)(rng);
}

/// A feasible claim with 0-2 caps; q >= 1 or q < 1 by regime.
inline ClaimRequest random_claim(Rng& rng, bool q_at_least_one) {
  ClaimRequest req;
  const double q = q_at_least_one ? uniform(rng, 1.0, 4.0) : uniform(rng, 0.2, 0.99);
  req.q = Exponent(q);
  std::vector<double> u(uniform_int(rng, 0, 6));
  for (double& x : u) x = uniform(rng, 0.0, 0.6);
  req.u = FinSeq(std::move(u));
  const u64 k = uniform_int(rng, 0, 2);
  double p = q;
  for (u64 i = 0; i <= k; ++i) {
    p *= uniform(rng, 0.5, 0.95);
    req.exps.emplace_back(p);
  }
  for (u64 i = 0; i < k; ++i) {
    req.caps.push_back(power_sum(req.u, req.exps[i]).hi + uniform(rng, 0.05, 2.0));
  }
  req.target = uniform(rng, 0.5, 4.0);
  req.eps = uniform(rng, 0.01, 1.0);
  return req;
}

/// Agrees with `base` on every index <= agree_to and differs at some later
/// index within `spread`.
inline AlphaSpec perturb_after(const AlphaSpec& base, u64 agree_to, Rng& rng,
                               u64 spread = 4) {
  const u64 n = agree_to + 1 + uniform_int(rng, 0, spread - 1);
  const auto [i, j] = unpair(n);
  FiniteOnes row;
  for (u64 c = 0; c < j; ++c) {
    if (alpha_bit(base, pair(i, c))) row.cols.insert(c);
  }
  if (!alpha_bit(base, n)) row.cols.insert(j);
  AlphaSpec out = base;
  out.rows[i] = row;
  return out;
}

inline std::vector<FinSeq> random_rows(Rng& rng, u64 max_rows = 6,
                                       u64 max_len = 20) {
  std::vector<FinSeq> rows(uniform_int(rng, 1, max_rows));
  for (auto& r : rows) {
    std::vector<double> v(uniform_int(rng, 0, max_len));
    for (double& x : v) x = uniform(rng, -1.0, 1.0);
    r = FinSeq(std::move(v));
  }
  return rows;
}

/// Smallest window holding every entry of `rows`.
inline u64 covering_window(const std::vector<FinSeq>& rows) {
  u64 upto = 0;
  for (u64 m = 0; m < rows.size(); ++m) {
    const auto len = static_cast<u64>(rows[m].length());
    if (len > 0) upto = std::max(upto, pair(m, len - 1) + 1);
  }
  return upto;
}

/// A pair of explicit sequences with entries in [0, 1).
inline std::pair<FinSeq, FinSeq> random_sub_unit_pair(Rng& rng) {
  const u64 len = uniform_int(rng, 1, 10);
  const double scale = uniform(rng, 0.0, 1.0) < 0.5 ? 0.05 : 1.0;
  std::vector<double> x(len), y(len);
  for (u64 t = 0; t < len; ++t) {
    x[t] = uniform(rng, 0.0, scale);
    y[t] = uniform(rng, 0.0, scale);
  }
  return {FinSeq(std::move(x)), FinSeq(std::move(y))};
}

// --------------------------------------------------------------------------
// Suites

struct SuiteResult {
  std::string name;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::vector<std::string> failures = {};

  void absorb(const CheckReport& report, const std::string& context) {
    for (const auto& c : report.checks) {
      ++checked;
      if (c.pass) continue;
      ++violations;
      if (failures.size() < 20) {
        failures.push_back(context + ": " + c.name + " " + format_double(c.lhs) +
                           " " + c.relation + " " + format_double(c.rhs) +
                           (c.detail.empty() ? "" : " (" + c.detail + ")"));
      }
    }
  }
  void record(bool pass, const std::string& what) {
    ++checked;
    if (pass) return;
    ++violations;
    if (failures.size() < 20) failures.push_back(what);
  }
  bool ok() const { return violations == 0; }
};

struct VerifyReport {
  RunConfig config;
  std::vector<SuiteResult> suites;

  bool ok() const {
    return std::all_of(suites.begin(), suites.end(),
                       [](const SuiteResult& s) { return s.ok(); });
  }
  const SuiteResult* find(const std::string& name) const {
    for (const auto& s : suites) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }
};

inline std::vector<SuiteResult> property_suites(const ConstructionCache& cache,
                                                std::size_t max_len) {
  const PropertyReport props = check_properties(cache, max_len);
  std::vector<SuiteResult> out;
  for (const auto& p : props.properties) {
    out.push_back({"property " + std::to_string(p.id) + " (" + p.name + ")",
                   p.checked, p.failed, p.failures});
  }
  return out;
}

inline SuiteResult block_bound_suite(ConstructionCache& cache,
                                     const std::vector<CorpusEntry>& corpus,
                                     u64 k) {
  SuiteResult s{"block bound and unit ball"};
  for (const auto& e : corpus) {
    s.absorb(unit_ball_check(f_blocks(cache, e.spec, k), cache.margin()),
             "spec '" + e.text + "'");
  }
  return s;
}

inline SuiteResult divergence_suite(ConstructionCache& cache,
                                    const std::vector<CorpusEntry>& corpus,
                                    double target) {
  SuiteResult s{"divergence"};
  for (const auto& e : corpus) {
    if (in_P3(e.spec)) continue;
    const u64 row = first_infinite_row(e.spec);
    const DivergenceResult r = divergence_witness(cache, e.spec, row, target);
    // Independent re-summation of the returned prefix.
    const double lo =
        power_sum(r.prefix, cache.ladder().exponent(row), SumRoute::reference).lo;
    s.record(lo > target, "spec '" + e.text + "' row " + std::to_string(row) +
                              ": p-power " + format_double(lo) + " vs target " +
                              format_double(target));
  }
  return s;
}

inline SuiteResult stabilization_suite(ConstructionCache& cache,
                                       const std::vector<CorpusEntry>& corpus,
                                       u64 rows, u64 max_k) {
  SuiteResult s{"stabilization"};
  for (const auto& e : corpus) {
    if (!in_P3(e.spec)) continue;
    for (u64 i = 0; i <= rows; ++i) {
      s.absorb(stabilization_check(cache, e.spec, i, max_k, cache.margin()),
               "spec '" + e.text + "' i=" + std::to_string(i));
    }
  }
  return s;
}

inline SuiteResult continuity_suite(ConstructionCache& cache,
                                    const std::vector<CorpusEntry>& corpus,
                                    std::uint64_t seed, u64 pairs,
                                    u64 k_extra = 4) {
  SuiteResult s{"continuity"};
  Rng rng(seed);
  for (u64 n = 0; n < pairs; ++n) {
    const auto& base = corpus[uniform_int(rng, 0, corpus.size() - 1)];
    const u64 agree_to = uniform_int(rng, 3, 8);
    const AlphaSpec other = perturb_after(base.spec, agree_to, rng);
    s.absorb(continuity_check(cache, base.spec, other, agree_to, k_extra),
             "'" + base.text + "' vs '" + to_string(other) + "' k=" +
                 std::to_string(agree_to));
  }
  return s;
}

inline SuiteResult claim_suite(std::uint64_t seed, u64 per_regime, Margin m) {
  SuiteResult s{"claim"};
  Rng rng(seed);
  for (bool regime : {true, false}) {
    for (u64 n = 0; n < per_regime; ++n) {
      const ClaimRequest req = random_claim(rng, regime);
      const ClaimWitness w = extend(req, m);
      s.absorb(verify_witness(req, w, m),
               std::string(regime ? "q>=1" : "q<1") + " case " + std::to_string(n));
    }
  }
  return s;
}

inline SuiteResult corollary_suite(ConstructionCache& cache,
                                   const std::vector<CorpusEntry>& corpus,
                                   std::uint64_t seed, u64 k) {
  SuiteResult s{"corollary"};
  Rng rng(seed);
  for (int n = 0; n < 1000; ++n) {
    const auto rows = random_rows(rng);
    const u64 upto = covering_window(rows);
    const DoubleSeq d = interleave(rows, upto);
    for (u64 m = 0; m < rows.size(); ++m) {
      auto back = extract_row(d, m).values();
      auto want = rows[m].values();
      want.resize(back.size(), 0.0);
      s.record(back == want, "round trip case " + std::to_string(n) +
                                 " row " + std::to_string(m));
    }
    const auto other = random_rows(rng);
    const DoubleSeq e = interleave(other, upto);
    const u64 m = uniform_int(rng, 0, rows.size());
    s.absorb(lipschitz_check(d, e, m, {0.5, 1.0, 2.0}),
             "lipschitz case " + std::to_string(n));
  }
  for (double b : {0.5, 1.0, 2.0}) {
    const ExpLadder ladder(b, b < 1.0 ? 0.99 : b + 1.0);
    for (int n = 0; n < 100; ++n) {
      const auto [x, y] = random_sub_unit_pair(rng);
      s.absorb(embedding_inequality_check(x, y, Exponent(b), ladder, 30),
               "embedding b=" + format_double(b) + " case " + std::to_string(n));
    }
  }
  std::vector<AlphaSpec> specs;
  for (std::size_t m = 0; m <= 6; ++m) specs.push_back(corpus[m % corpus.size()].spec);
  s.absorb(check_pi4_certificate(build_pi4_certificate(cache, specs, k)),
           "pi4 certificate");
  return s;
}

/// Every suite against one cache populated to config.max_len.
inline VerifyReport run_verification(ConstructionCache& cache,
                                     const RunConfig& config) {
  VerifyReport report{config, {}};
  const auto corpus = standard_corpus();
  for (auto& s : property_suites(cache, config.max_len)) {
    report.suites.push_back(std::move(s));
  }
  report.suites.push_back(block_bound_suite(cache, corpus, config.k));
  report.suites.push_back(divergence_suite(cache, corpus, config.target));
  report.suites.push_back(stabilization_suite(cache, corpus, 2, config.k));
  report.suites.push_back(continuity_suite(cache, corpus, config.seed, 20));
  report.suites.push_back(claim_suite(config.seed, 100, cache.margin()));
  report.suites.push_back(corollary_suite(cache, corpus, config.seed, config.k));
  return report;
}

inline nlohmann::ordered_json to_json(const VerifyReport& report) {
  nlohmann::ordered_json j;
  const auto& c = report.config;
  j["config"] = {{"a", c.a},           {"q", c.q},
                 {"max_len", c.max_len}, {"eta", c.eta},
                 {"step_budget", c.step_budget}, {"seed", c.seed},
                 {"k", c.k},           {"target", c.target}};
  if (c.ladder) j["config"]["ladder"] = *c.ladder;
  j["ok"] = report.ok();
  auto& suites = j["suites"] = nlohmann::ordered_json::array();
  for (const auto& s : report.suites) {
    suites.push_back({{"suite", s.name},
                      {"checked", s.checked},
                      {"violations", s.violations},
                      {"failures", s.failures}});
  }
  return j;
}

}  // namespace lprl
