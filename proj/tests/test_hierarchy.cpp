#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "lprl/hierarchy.hpp"
#include "lprl/verify.hpp"
#include "oracles.hpp"

using namespace lprl;

TEST_CASE("row extraction follows the enumeration", "[hierarchy]") {
  const DoubleSeq d{FinSeq{1.0, 2.0, 3.0}};  // <0,0>, <1,0>, <0,1>
  CHECK(extract_row(d, 0).values() == std::vector<double>{1.0, 3.0});
  CHECK(extract_row(d, 1).values() == std::vector<double>{2.0});
  CHECK(extract_row(d, 5).empty());
  CHECK(extract_row(DoubleSeq{}, 0).empty());
}

TEST_CASE("interleaving", "[hierarchy]") {
  const FinSeq r{0.5, 0.25, 0.125};
  const DoubleSeq single = interleave({r}, 10);
  auto back = extract_row(single, 0).values();
  CHECK(back.size() == 4);  // <0,0..3> = 0, 2, 5, 9
  back.resize(3);
  CHECK(back == r.values());

  CHECK(interleave({}, 10).flat.values() == std::vector<double>(10, 0.0));

  // Two rows, laid out by the table scan.
  const FinSeq a{1, 2, 3}, b{4, 5};
  const auto flat = interleave({a, b}, 10).flat.values();
  const oracle::PairTable table(10);
  std::vector<double> want(10, 0.0);
  for (std::size_t n = 0; n < 10; ++n) {
    const auto [m, t] = table.cells[n];
    const auto& row = m == 0 ? a.values() : m == 1 ? b.values() : std::vector<double>{};
    if (t < row.size()) want[n] = row[t];
  }
  CHECK(flat == want);
}

TEST_CASE("round trips on random double sequences", "[hierarchy]") {
  Rng rng(3);
  for (int n = 0; n < 300; ++n) {
    const auto rows = random_rows(rng);
    const DoubleSeq d = interleave(rows, covering_window(rows));
    for (std::size_t m = 0; m < rows.size(); ++m) {
      auto back = extract_row(d, m).values();
      const auto want = rows[m].values();
      REQUIRE(back.size() >= want.size());
      for (std::size_t t = want.size(); t < back.size(); ++t) CHECK(back[t] == 0.0);
      back.resize(want.size());
      CHECK(back == want);
    }
  }
}

TEST_CASE("row extraction is 1-Lipschitz", "[hierarchy]") {
  Rng rng(5);
  for (int n = 0; n < 200; ++n) {
    const auto rows = random_rows(rng);
    const auto other = random_rows(rng);
    const u64 upto = std::max(covering_window(rows), covering_window(other));
    const DoubleSeq x = interleave(rows, upto), y = interleave(other, upto);
    for (u64 m = 0; m < 7; ++m) CHECK(lipschitz_check(x, y, m, {0.5, 1.0, 2.0}).ok());
  }
}

TEST_CASE("embedding inequalities", "[hierarchy]") {
  const ExpLadder above_one(1.0, 2.0);
  const FinSeq x{0.5, 0.5};
  const auto same = embedding_inequality_check(x, x, Exponent(1), above_one, 20);
  CHECK(same.ok());
  CHECK(same.find("sup")->lhs == 0.0);
  CHECK(same.find("frechet")->lhs == 0.0);

  const auto r = embedding_inequality_check(x, FinSeq{}, Exponent(1), above_one, 20);
  CHECK(r.ok());
  CHECK(r.find("sup")->lhs == 0.5);
  CHECK(r.find("sup")->rhs == 1.0);

  // b < 1: the Frechet comparison only applies when d_b(x,y) < 1.
  const ExpLadder above_half(0.5, 0.99);
  const auto big = embedding_inequality_check(FinSeq{0.9, 0.9}, FinSeq{}, Exponent(0.5), above_half, 20);
  CHECK(big.ok());
  CHECK(big.find("frechet") == nullptr);
  const auto near = embedding_inequality_check(FinSeq{0.01, 0.02}, FinSeq{}, Exponent(0.5), above_half, 20);
  CHECK(near.ok());
  CHECK(near.find("frechet") != nullptr);

  CHECK_THROWS_AS(embedding_inequality_check(x, x, Exponent(0.5), above_one, 5), InvalidInput);

  Rng rng(9);
  for (double b : {0.5, 1.0, 2.0}) {
    const ExpLadder ladder(b, b < 1.0 ? 0.99 : b + 1.0);
    for (int n = 0; n < 100; ++n) {
      const auto [u, v] = random_sub_unit_pair(rng);
      CHECK(embedding_inequality_check(u, v, Exponent(b), ladder, 30).ok());
    }
  }
}

TEST_CASE("countable product certificates", "[hierarchy]") {
  for (double q : {2.0, 0.5}) {
    ConstructionCache cache{ExpLadder(0.0, q)};
    const auto corpus = standard_corpus();
    std::vector<AlphaSpec> specs;
    for (std::size_t m = 0; m <= 6; ++m) specs.push_back(corpus[(m + 3) % corpus.size()].spec);
    const Pi4Certificate cert = build_pi4_certificate(cache, specs, 10, 512);
    CHECK(check_pi4_certificate(cert).ok());
    CHECK_FALSE(cert.in_B());
    CHECK(cert.some_component_outside());

    const auto& c3 = cert.components[3];
    CHECK(oracle::power_bracket(c3.prefix, q).second + c3.tail_q_bound <= 0.125L);
    for (std::size_t m = 0; m < specs.size(); ++m) {
      CHECK(cert.outside_intersection[m] == !in_P3(specs[m]));
      CHECK(cert.scalings[m] <= 1.0);
    }
  }

  ConstructionCache cache{ExpLadder(0.0, 2.0)};
  const auto inside = build_pi4_certificate(cache, {AlphaSpec{}, parse_alpha_spec("row=1:finite{2}")}, 6);
  CHECK_FALSE(inside.some_component_outside());
  CHECK_FALSE(inside.in_B());

  std::ostringstream out;
  write_pi4_certificate(out, inside);
  CHECK(out.str().rfind("lprl-pi4 1\ncomponents 2\n", 0) == 0);
}
