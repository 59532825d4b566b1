// lprl: build construction caches, run the verification suites and trace
// the blocks of f(alpha) for a described point alpha.
//
// Exit status: 0 success, 1 verification failure, 2 usage or parse error,
// 3 resource exhaustion.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lprl/config.hpp"
#include "lprl/construction.hpp"
#include "lprl/reduction.hpp"
#include "lprl/verify.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kResource = 3 };

constexpr const char* kTraceColumns =
    "trace.csv columns: k, bit, block_len, q_power, p0_power..p{r-1}_power, "
    "cum_q, cum_p0..cum_p{r-1}; powers are certified upper bounds, 17 "
    "significant digits.";

fs::path output_dir(const lprl::RunConfig& c) {
  fs::path dir = c.output_dir;
  fs::create_directories(dir);
  return dir;
}

std::string cache_text(const lprl::ConstructionCache& cache) {
  std::ostringstream s;
  cache.write(s);
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lprl::Error("cannot write " + path.string());
  out << text;
}

lprl::ConstructionCache make_cache(const lprl::RunConfig& c) {
  return lprl::ConstructionCache(c.make_ladder(), c.margin(), c.step_budget);
}

int cmd_build(const lprl::RunConfig& c) {
  auto cache = make_cache(c);
  cache.populate(c.max_len);
  const auto path = output_dir(c) / "cache.txt";
  write_file(path, cache_text(cache));
  const auto st = cache.stats();
  std::cout << "nodes " << st.nodes << '\n'
            << "max phi length " << lprl::format_double(st.max_phi_length) << '\n'
            << "segments " << st.segments << '\n'
            << "memory ~" << st.approx_bytes << " bytes\n"
            << "wrote " << path.string() << '\n';
  return kOk;
}

// Reuses cache.txt when it was written under the same configuration.
lprl::ConstructionCache load_or_build(const lprl::RunConfig& c) {
  const auto path = fs::path(c.output_dir) / "cache.txt";
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    auto cache = lprl::ConstructionCache::read(in);
    const bool same = cache.ladder() == c.make_ladder() &&
                      cache.margin().eta == c.eta &&
                      cache.step_budget() == c.step_budget;
    if (same) {
      cache.populate(c.max_len);
      return cache;
    }
    std::cerr << "cache.txt has a different configuration; rebuilding\n";
  }
  auto cache = make_cache(c);
  cache.populate(c.max_len);
  return cache;
}

int cmd_verify(const lprl::RunConfig& c) {
  auto cache = load_or_build(c);
  const auto report = lprl::run_verification(cache, c);
  const auto path = output_dir(c) / "verify_report.json";
  write_file(path, lprl::to_json(report).dump(2) + "\n");
  for (const auto& s : report.suites) {
    std::cout << (s.ok() ? "PASS " : "FAIL ") << s.name << ": " << s.checked
              << " checked, " << s.violations << " violations\n";
    for (const auto& f : s.failures) std::cout << "  " << f << '\n';
  }
  std::cout << "wrote " << path.string() << '\n';
  return report.ok() ? kOk : kFailed;
}

int cmd_trace(const lprl::RunConfig& c, const std::string& spec_text,
              std::size_t rows) {
  const auto spec = lprl::parse_alpha_spec(spec_text);
  auto cache = make_cache(c);
  const auto bd = lprl::f_blocks(cache, spec, c.k);

  std::ostringstream csv;
  lprl::write_trace_csv(csv, bd, cache.ladder(), rows);
  std::cout << csv.str();
  const auto dir = output_dir(c);
  write_file(dir / "trace.csv", csv.str());
  std::ostringstream prefix;
  lprl::write_prefix(prefix, bd.prefix());
  write_file(dir / "prefix.txt", prefix.str());

  if (lprl::in_P3(spec)) {
    std::cerr << "alpha in P3\n";
    for (lprl::u64 i = 0; i < rows; ++i) {
      const auto r = lprl::stabilization_check(cache, spec, i, c.k, c.margin());
      if (const auto* w = r.find("window"); w && !w->pass) {
        std::cerr << "stabilization i=" << i << ": sigma_0 lies past k\n";
        continue;
      }
      std::cerr << "stabilization i=" << i << ": "
                << (r.ok() ? "caps constant" : "FAILED") << " (" << r.checks.size()
                << " checks)\n";
      if (!r.ok()) return kFailed;
    }
  } else {
    const auto row = lprl::first_infinite_row(spec);
    const auto r = lprl::divergence_witness(cache, spec, row, c.target);
    std::cerr << "alpha not in P3, row " << row << " has infinitely many ones\n"
              << "divergence: p_" << row << "-power "
              << lprl::format_double(r.norm_value) << " > "
              << lprl::format_double(c.target) << " after " << r.prefix_len
              << " bits\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified finite-scale construction of the l^p reduction"};
  app.require_subcommand(1);

  lprl::RunConfig config;
  if (const char* env = std::getenv("LPRL_OUT")) config.output_dir = env;
  std::vector<double> ladder;
  std::string spec_text;
  std::size_t rows = 3;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--a", config.a, "Lower exponent a >= 0")->capture_default_str();
    sub->add_option("--q", config.q, "Ambient exponent q > a")->capture_default_str();
    sub->add_option("--ladder", ladder, "Explicit exponents q > p_0 > p_1 > ... > a");
    sub->add_option("--max-len", config.max_len, "Tree depth")->capture_default_str();
    sub->add_option("--eta", config.eta, "Certification margin")->capture_default_str();
    sub->add_option("--step-budget", config.step_budget, "Witness search budget")
        ->capture_default_str();
    sub->add_option("--out", config.output_dir, "Output directory (env LPRL_OUT)")
        ->capture_default_str();
    sub->add_option("--seed", config.seed, "Seed for randomized suites")
        ->capture_default_str();
    sub->add_option("--k", config.k, "Block depth")->capture_default_str();
    sub->add_option("--target", config.target, "Divergence target")
        ->capture_default_str();
  };

  auto* build = app.add_subcommand("build", "Populate and export the cache");
  add_common(build);
  auto* verify = app.add_subcommand("verify", "Run every verification suite");
  add_common(verify);
  auto* trace = app.add_subcommand("trace", "Block table for one point alpha");
  add_common(trace);
  trace->add_option("--spec", spec_text,
                    "row=<i>:finite{j,...} | row=<i>:eventually(j) | "
                    "row=<i>:periodic(r,m,j), joined by ';'")
      ->required();
  trace->add_option("--rows", rows, "Exponents p_0..p_{rows-1} in the table")
      ->capture_default_str();
  trace->footer(kTraceColumns);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (!ladder.empty()) config.ladder = ladder;
    config.validate();
    if (*build) return cmd_build(config);
    if (*verify) return cmd_verify(config);
    return cmd_trace(config, spec_text, rows);
  } catch (const lprl::ResourceLimit& e) {
    std::cerr << "resource exhausted: " << e.what() << '\n';
    return kResource;
  } catch (const lprl::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const lprl::InvalidInput& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kUsage;
  } catch (const lprl::DomainError& e) {
    std::cerr << "invalid request: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
}
