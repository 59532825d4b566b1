#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(LPRL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lprl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2", "[cli]") {
  const auto dir = scratch("usage");
  CHECK(run("") == 2);
  CHECK(run("build --bogus") == 2);
  CHECK(run("build --a 2 --q 1 --out " + dir.string()) == 2);
  CHECK(run("build --max-len 0 --out " + dir.string()) == 2);
  CHECK(run("trace --spec 'row=0:finit{1}' --out " + dir.string()) == 2);
  CHECK(run("build --ladder 1.5 --ladder 1.7 --out " + dir.string()) == 2);
}

TEST_CASE("budget exhaustion exits with 3", "[cli]") {
  const auto dir = scratch("budget");
  CHECK(run("build --max-len 4 --step-budget 3 --out " + dir.string()) == 3);
}

TEST_CASE("build writes the cache", "[cli]") {
  const auto dir = scratch("build");
  REQUIRE(run("build --max-len 6 --out " + dir.string()) == 0);
  const std::string text = slurp(dir / "cache.txt");
  CHECK(text.rfind("lprl-cache 1\n", 0) == 0);
  CHECK(text.find("nodes 127\n") != std::string::npos);
}

TEST_CASE("trace writes the block table", "[cli]") {
  const auto dir = scratch("trace");
  REQUIRE(run("trace --spec 'row=0:eventually(0)' --k 4 --rows 2 --out " + dir.string()) == 0);
  std::istringstream csv(slurp(dir / "trace.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "k,bit,block_len,q_power,p0_power,p1_power,cum_q,cum_p0,cum_p1");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 5);
  CHECK(slurp(dir / "prefix.txt").rfind("# length ", 0) == 0);
}
