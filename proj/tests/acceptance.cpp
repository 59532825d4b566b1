// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lprl/lprl.hpp"
#include "oracles.hpp"

using namespace lprl;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<double, double>, 3> kConfigs{
    {{0.0, 2.0}, {0.0, 0.5}, {1.0, 3.0}}};
constexpr std::uint64_t kSeed = 20240611;

std::string config_name(std::pair<double, double> c) {
  return "(a,q)=(" + format_double(c.first) + "," + format_double(c.second) + ")";
}

/// Collects failures with a cap on how many get printed.
struct Tally {
  std::size_t checked = 0;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    ++checked;
    if (!ok) failures.push_back(what);
  }
  void absorb(const SuiteResult& s, const std::string& ctx) {
    checked += s.checked;
    for (const auto& f : s.failures) failures.push_back(ctx + ": " + f);
    if (s.violations > s.failures.size()) {
      failures.push_back(ctx + ": " + std::to_string(s.violations) + " violations");
    }
  }
  bool ok() const { return failures.empty(); }
};

struct Outcome {
  Tally tally;
  std::string note;
  double time_limit = 0.0;  // seconds, 0 for none
};

ConstructionCache& cache_for(std::pair<double, double> c) {
  static std::map<std::pair<double, double>, std::unique_ptr<ConstructionCache>> caches;
  auto& slot = caches[c];
  if (!slot) slot = std::make_unique<ConstructionCache>(ExpLadder(c.first, c.second));
  return *slot;
}

bool criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  std::string error;
  try {
    out = body();
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = out.time_limit <= 0.0 || secs < out.time_limit;
  const bool pass = error.empty() && out.tally.ok() && in_time;

  std::ostringstream line;
  line << (pass ? "PASS" : "FAIL") << "  " << id << ". " << title << "  ["
       << out.tally.checked << " checks, ";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f s", secs);
  line << buf;
  if (out.time_limit > 0.0) line << " of " << out.time_limit << " s";
  line << "]";
  if (!out.note.empty()) line << "  " << out.note;
  std::cout << line.str() << '\n';
  if (!error.empty()) std::cout << "      error: " << error << '\n';
  if (!in_time) std::cout << "      over the time limit\n";
  std::size_t shown = 0;
  for (const auto& f : out.tally.failures) {
    if (++shown > 10) {
      std::cout << "      ... " << out.tally.failures.size() - 10 << " more\n";
      break;
    }
    std::cout << "      " << f << '\n';
  }
  std::cout.flush();
  return pass;
}

// --------------------------------------------------------------------------

Outcome pairing_fidelity() {
  Outcome out{{}, {}, 1.0};
  auto& t = out.tally;
  // The displayed table, anti-diagonal by anti-diagonal.
  const std::array<std::pair<u64, u64>, 10> shown{
      {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}}};
  for (u64 n = 0; n < shown.size(); ++n) {
    t.expect(pair(shown[n].first, shown[n].second) == n, "table entry " + std::to_string(n));
  }
  const oracle::PairTable table(1000000);
  for (u64 n = 0; n < 1000000; ++n) {
    const auto cell = unpair(n);
    if (cell != table.cells[n] || pair(cell.first, cell.second) != n) {
      t.expect(false, "round trip at " + std::to_string(n));
    } else {
      ++t.checked;
    }
  }
  return out;
}

Outcome grid_laws() {
  Outcome out{{}, {}, 10.0};
  auto& t = out.tally;
  // Depth and level from the scan, for every length that occurs.
  const oracle::PairTable table(17);
  u64 deepest = 0;
  for (u64 len = 1; len <= 17; ++len) {
    deepest = std::max(deepest, table.cells[len - 1].first);
    t.expect(depth_of_length(len) == static_cast<std::int64_t>(deepest),
             "depth at length " + std::to_string(len));
    t.expect(level_of_length(len) == table.cells[len - 1].first,
             "level at length " + std::to_string(len));
  }
  t.expect(depth_of_length(8) == 3 && level_of_length(8) == 2, "length 8 gives d=3, l=2");

  std::size_t strings = 0;
  for (std::size_t len = 1; len <= 16; ++len) {
    for (u64 bits = 0; bits < (u64{1} << len); ++bits) {
      BitString s;
      for (std::size_t k = 0; k < len; ++k) s.push_back(static_cast<int>((bits >> k) & 1));
      ++strings;
      for (int b : {0, 1}) {
        const LawReport r = extend_laws_check(s, b);
        if (!r.ok()) {
          t.expect(false, r.violations.front().law + ": " + r.violations.front().detail);
        } else {
          ++t.checked;
        }
      }
    }
  }
  t.expect(strings == (u64{1} << 17) - 2, "string count " + std::to_string(strings));
  out.note = std::to_string(strings) + " strings";
  return out;
}

Outcome claim_soundness() {
  Outcome out{{}, {}, 30.0};
  auto& t = out.tally;
  const Margin m(std::ldexp(1.0, -20));

  // Same seeded requests the library suite draws, re-checked by the oracle.
  t.absorb(claim_suite(kSeed, 100, m), "suite");
  Rng rng(kSeed);
  for (bool regime : {true, false}) {
    for (int n = 0; n < 100; ++n) {
      const ClaimRequest req = random_claim(rng, regime);
      const ClaimWitness w = extend(req, m);
      const std::string ctx = std::string(regime ? "q>=1" : "q<1") + " case " + std::to_string(n);
      t.expect(oracle::sum_below(w.v, req.q.value(), req.eps), ctx + " q-cost");
      const FinSeq joined = concat(req.u, w.v);
      for (std::size_t i = 0; i < req.caps.size(); ++i) {
        t.expect(oracle::sum_below(joined, req.exps[i].value(), req.caps[i]),
                 ctx + " cap " + std::to_string(i));
      }
      t.expect(oracle::sum_above(joined, req.exps.back().value(), req.target),
               ctx + " growth");
    }
  }

  ClaimRequest req;
  req.q = Exponent(2);
  req.exps = {Exponent(1), Exponent(0.5)};
  req.caps = {10};
  req.target = 1;
  req.eps = 10;
  const ClaimWitness w = extend(req, m);
  const std::vector<double> want{1.0 / 4, 1.0 / 9, 1.0 / 16};
  const auto got = w.v.values();
  t.expect(got.size() == 3, "worked example has three entries");
  for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
    t.expect(std::fabs(got[i] - want[i]) <= 1e-12, "worked example entry " + std::to_string(i));
  }
  for (double p : {2.0, 1.0, 0.5}) {
    const double lib = pnorm_pow(w.v, Exponent(p));
    const double ref = static_cast<double>(oracle::direct_power_sum(want, p));
    t.expect(std::fabs(lib - ref) <= 1e-12, "worked example sum at p=" + format_double(p));
  }
  t.expect(verify_witness(req, w, m).ok(), "worked example verifies");
  return out;
}

Outcome construction_properties() {
  Outcome out;
  auto& t = out.tally;
  std::ostringstream note;
  for (const auto& c : kConfigs) {
    ConstructionCache& cache = cache_for(c);
    cache.populate(10);
    t.expect(cache.size() == 2047, config_name(c) + " node count " + std::to_string(cache.size()));
    const PropertyReport r = check_properties(cache, 10);
    for (const auto& p : r.properties) {
      t.checked += p.checked;
      for (const auto& f : p.failures) t.failures.push_back(config_name(c) + " property " + std::to_string(p.id) + ": " + f);
      if (p.failed > p.failures.size()) {
        t.failures.push_back(config_name(c) + " property " + std::to_string(p.id) + ": " +
                             std::to_string(p.failed) + " violations");
      }
    }
    // Cap discipline again, by the oracle.
    for (const auto& [sigma, node] : cache.nodes()) {
      for (std::size_t i = 0; i < node.caps.size(); ++i) {
        t.expect(oracle::sum_below(node.phi, cache.ladder().p(i),
                                   static_cast<long double>(node.caps[i])),
                 config_name(c) + " oracle cap " + std::to_string(i) + " at '" +
                     sigma.to_string() + "'");
      }
    }
    note << config_name(c) << ' ' << r.total_checked() << "  ";
  }
  out.note = note.str();
  return out;
}

Outcome block_bound() {
  Outcome out;
  auto& t = out.tally;
  const auto corpus = standard_corpus();
  for (const auto& c : kConfigs) {
    ConstructionCache& cache = cache_for(c);
    for (const auto& e : corpus) {
      const std::string ctx = config_name(c) + " '" + e.text + "'";
      const BlockDecomposition bd = f_blocks(cache, e.spec, 12);
      const CheckReport r = unit_ball_check(bd, cache.margin());
      for (const auto& ch : r.checks) t.expect(ch.pass, ctx + " " + ch.name);
      long double total = 0.0L;
      for (std::size_t k = 0; k < bd.blocks.size(); ++k) {
        total += oracle::power_bracket(bd.blocks[k], c.second).second;
        t.expect(oracle::sum_below(bd.blocks[k], c.second, std::ldexp(1.0L, -static_cast<int>(k + 1))),
                 ctx + " oracle block " + std::to_string(k));
      }
      t.expect(total <= 1.0L, ctx + " oracle cumulative");
    }
  }
  return out;
}

Outcome dichotomy() {
  Outcome out;
  auto& t = out.tally;
  const auto corpus = standard_corpus();
  constexpr double target = 3.0;
  for (const auto& c : kConfigs) {
    ConstructionCache& cache = cache_for(c);
    for (const auto& e : corpus) {
      const std::string ctx = config_name(c) + " '" + e.text + "'";
      if (!in_P3(e.spec)) {
        const u64 row = first_infinite_row(e.spec);
        const DivergenceResult r = divergence_witness(cache, e.spec, row, target);
        t.expect(r.norm_value > target, ctx + " certified p-power above target");
        t.expect(oracle::sum_above(r.prefix, cache.ladder().p(row), target), ctx + " re-sum");
        continue;
      }
      for (u64 i = 0; i <= 2; ++i) {
        const std::string at = ctx + " i=" + std::to_string(i);
        const CheckReport r = stabilization_check(cache, e.spec, i, 12, cache.margin());
        for (const auto& ch : r.checks) t.expect(ch.pass, at + " " + ch.name);
        if (!r.ok()) continue;
        const u64 n0 = static_cast<u64>(r.find("window")->lhs);
        const u64 cap = cache.at(alpha_prefix(e.spec, n0 + 1)).caps.at(i);
        for (u64 k = n0; k <= 12; ++k) {
          const Node& node = cache.at(alpha_prefix(e.spec, k + 1));
          t.expect(oracle::sum_below(node.phi, cache.ladder().p(i), static_cast<long double>(cap)),
                   at + " oracle k=" + std::to_string(k));
        }
      }
    }
  }
  return out;
}

Outcome continuity() {
  Outcome out;
  auto& t = out.tally;
  const auto corpus = standard_corpus();
  constexpr u64 k_extra = 4;
  for (const auto& c : kConfigs) {
    ConstructionCache& cache = cache_for(c);
    const double q = c.second;
    // Draws mirror the library suite; the oracle bounds each distance by the
    // triangle inequality on independently summed remainders.
    Rng rng(kSeed);
    for (int n = 0; n < 20; ++n) {
      const auto& base = corpus[uniform_int(rng, 0, corpus.size() - 1)];
      const u64 agree_to = uniform_int(rng, 3, 8);
      const AlphaSpec other = perturb_after(base.spec, agree_to, rng);
      const std::string ctx = config_name(c) + " '" + base.text + "' vs '" +
                              to_string(other) + "' k=" + std::to_string(agree_to);
      const CheckReport r = continuity_check(cache, base.spec, other, agree_to, k_extra);
      for (const auto& ch : r.checks) t.expect(ch.pass, ctx + " " + ch.name);

      const u64 k = agree_to + k_extra;
      const auto ba = f_blocks(cache, base.spec, k);
      const auto bb = f_blocks(cache, other, k);
      long double sa = 0.0L, sb = 0.0L;
      for (u64 s = agree_to + 1; s <= k; ++s) {
        sa += oracle::power_bracket(ba.blocks[s], q).second;
        sb += oracle::power_bracket(bb.blocks[s], q).second;
      }
      const long double scale = std::ldexp(1.0L, -static_cast<int>(agree_to + 1));
      if (q >= 1.0) {
        // Blocks past the shared ones each have their own q-power; the
        // remainder norm is at most the p-sum of those.
        const long double dist = std::pow(sa, 1.0L / q) + std::pow(sb, 1.0L / q);
        t.expect(dist <= 2.0L * std::pow(scale, 1.0L / q), ctx + " oracle distance");
      } else {
        t.expect(sa + sb <= 2.0L * scale, ctx + " oracle distance");
      }
    }
  }
  return out;
}

Outcome corollary() {
  Outcome out;
  auto& t = out.tally;
  Rng rng(kSeed);
  std::size_t conditional = 0;

  const oracle::PairTable table(1 << 16);
  for (int n = 0; n < 1000; ++n) {
    const auto rows = random_rows(rng);
    const u64 upto = covering_window(rows);
    const DoubleSeq d = interleave(rows, upto);
    // Placement by the scan table.
    const auto flat = d.flat.values();
    bool placed = flat.size() == upto && upto <= table.cells.size();
    for (u64 idx = 0; placed && idx < upto; ++idx) {
      const auto [m, j] = table.cells[idx];
      const double want = m < rows.size() && j < rows[m].values().size() ? rows[m].values()[j] : 0.0;
      placed = flat[idx] == want;
    }
    t.expect(placed, "placement case " + std::to_string(n));
    for (u64 m = 0; m < rows.size(); ++m) {
      auto back = extract_row(d, m).values();
      const auto want = rows[m].values();
      bool same = back.size() >= want.size();
      for (std::size_t j = 0; same && j < back.size(); ++j) {
        same = back[j] == (j < want.size() ? want[j] : 0.0);
      }
      t.expect(same, "round trip case " + std::to_string(n) + " row " + std::to_string(m));
    }
    const DoubleSeq e = interleave(random_rows(rng), upto);
    const u64 m = uniform_int(rng, 0, rows.size());
    const CheckReport r = lipschitz_check(d, e, m, {0.5, 1.0, 2.0});
    for (const auto& ch : r.checks) t.expect(ch.pass, "lipschitz case " + std::to_string(n) + " " + ch.name);
    t.expect(r.checks.size() == 4, "lipschitz covers three exponents and sup");
  }

  for (double b : {0.5, 1.0, 2.0}) {
    const ExpLadder ladder(b, b < 1.0 ? 0.99 : b + 1.0);
    for (int n = 0; n < 100; ++n) {
      const auto [x, y] = random_sub_unit_pair(rng);
      const CheckReport r = embedding_inequality_check(x, y, Exponent(b), ladder, 30);
      for (const auto& ch : r.checks) {
        t.expect(ch.pass, "embedding b=" + format_double(b) + " case " + std::to_string(n) + " " + ch.name);
      }
      if (b < 1.0 && r.find("frechet")) ++conditional;
    }
  }
  t.expect(conditional > 0, "conditional b < 1 case exercised");

  const auto corpus = standard_corpus();
  for (const auto& c : kConfigs) {
    ConstructionCache& cache = cache_for(c);
    std::vector<AlphaSpec> specs;
    for (std::size_t m = 0; m <= 6; ++m) specs.push_back(corpus[(m + 4) % corpus.size()].spec);
    const Pi4Certificate cert = build_pi4_certificate(cache, specs, 12);
    const CheckReport r = check_pi4_certificate(cert);
    for (const auto& ch : r.checks) t.expect(ch.pass, config_name(c) + " pi4 " + ch.name);
    t.expect(cert.some_component_outside(), config_name(c) + " pi4 has a component outside");
    for (std::size_t m = 0; m < cert.components.size(); ++m) {
      const auto& pc = cert.components[m];
      t.expect(oracle::sum_below(pc.prefix, c.second, std::ldexp(1.0L, -static_cast<int>(m)),
                                 pc.tail_q_bound),
               config_name(c) + " pi4 oracle component " + std::to_string(m));
    }
  }
  out.note = std::to_string(conditional) + " conditional b<1 cases";
  return out;
}

// --------------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LPRL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome out;
  auto& t = out.tally;
  const fs::path root = fs::temp_directory_path() / "lprl_acceptance";
  for (const auto& c : kConfigs) {
    const std::string flags = "--a " + format_double(c.first) + " --q " +
                              format_double(c.second) + " --max-len 10";
    std::vector<std::string> exports;
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = root / ("run" + std::to_string(run));
      fs::remove_all(dir);
      fs::create_directories(dir);
      const int code = run_cli("build " + flags + " --out " + dir.string());
      t.expect(code == 0, config_name(c) + " build exit " + std::to_string(code));
      exports.push_back(slurp(dir / "cache.txt"));
    }
    t.expect(!exports[0].empty(), config_name(c) + " cache export written");
    t.expect(exports[0] == exports[1], config_name(c) + " exports differ");
  }
  fs::remove_all(root);
  return out;
}

}  // namespace

int main() {
  std::cout << "lprl acceptance\n";
  bool ok = true;
  ok &= criterion(1, "pairing fidelity", pairing_fidelity);
  ok &= criterion(2, "grid laws", grid_laws);
  ok &= criterion(3, "claim soundness", claim_soundness);
  ok &= criterion(4, "construction properties", construction_properties);
  ok &= criterion(5, "block bound and unit ball", block_bound);
  ok &= criterion(6, "dichotomy", dichotomy);
  ok &= criterion(7, "continuity modulus", continuity);
  ok &= criterion(8, "corollary machinery", corollary);
  ok &= criterion(9, "determinism", determinism);
  std::cout << (ok ? "all criteria pass\n" : "some criteria fail\n");
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
