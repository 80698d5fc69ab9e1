#include <doctest.h>

#include <cmath>
#include <random>

#include "cevoi/analysis.hpp"
#include "cevoi/error.hpp"
#include "cevoi/summary.hpp"
#include "fixtures.hpp"

using namespace cevoi;
using namespace cevoi::testing;

TEST_CASE("TINY statistics at k = 20") {
  const Analysis a = tiny_analysis();
  const std::size_t k = grid_index(a, 20);
  REQUIRE(a.grid()[k] == 20.0);

  CHECK(a.comparisons() == std::vector<std::size_t>{0});
  REQUIRE(a.icer(0).value.has_value());
  CHECK(*a.icer(0).value == 15.0);
  CHECK(a.icer(0).direction == 1);

  const double u0[] = {10, 10, 10};
  const double u1[] = {15, 25, 5};
  const double ustar[] = {15, 25, 10};
  const double ol[] = {0, 0, 5};
  const double vi[] = {0, 10, -5};
  const double ib[] = {5, 15, -5};
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(a.U(s, k, 0) == u0[s]);
    CHECK(a.U(s, k, 1) == u1[s]);
    CHECK(a.Ustar(s, k) == ustar[s]);
    CHECK(a.ol(s, k) == ol[s]);
    CHECK(a.vi(s, k) == vi[s]);
    CHECK(a.ib(s, k, 0) == ib[s]);
  }
  CHECK(a.eib(k, 0) == 5.0);
  CHECK(a.ceac(k, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(a.evi(k) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(a.best(k) == 1);
}

TEST_CASE("TINY at k = 0 and at the break-even k = 15") {
  const Analysis a = tiny_analysis();
  const std::size_t k0 = grid_index(a, 0);
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(a.U(s, k0, 0) == -a.dataset().costs(s, 0));
    CHECK(a.U(s, k0, 1) == -a.dataset().costs(s, 1));
  }
  CHECK(a.eib(k0, 0) == -15.0);
  CHECK(a.ceac(k0, 0) == 0.0);
  CHECK(a.best(k0) == 0);

  const std::size_t k15 = grid_index(a, 15);
  const double ib[] = {0, 5, -5};  // hand enumeration; mean 0
  for (std::size_t s = 0; s < 3; ++s) CHECK(a.ib(s, k15, 0) == ib[s]);
  CHECK(a.eib(k15, 0) == 0.0);
  // Exact ties do not count as cost-effective.
  CHECK(a.ceac(k15, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("kstar marks decision changes") {
  const Analysis a = tiny_analysis();
  CHECK(a.kstar() == std::vector<double>{15.0});

  SUBCASE("identical arms never switch") {
    Matrix e(3, 2), c(3, 2);
    for (std::size_t s = 0; s < 3; ++s) {
      e(s, 0) = e(s, 1) = 1.0 + static_cast<double>(s);
      c(s, 0) = c(s, 1) = 10.0 * static_cast<double>(s + 1);
    }
    const Analysis same = new_analysis(make_dataset(e, c, {"A", "B"}), 1, std::nullopt, 30.0, 7);
    CHECK(same.kstar().empty());
    for (std::size_t k = 0; k < same.n_k(); ++k) {
      CHECK(same.eib(k, 0) == 0.0);
      CHECK(same.ceac(k, 0) == 0.0);
      CHECK(same.evi(k) == 0.0);
      for (std::size_t s = 0; s < 3; ++s) CHECK(same.ol(s, k) == 0.0);
    }
  }
}

TEST_CASE("zero inputs give zero utilities") {
  const Analysis a = new_analysis(make_dataset(Matrix(4, 3), Matrix(4, 3)), 0, std::nullopt, 10.0, 5);
  for (std::size_t k = 0; k < a.n_k(); ++k) {
    for (std::size_t s = 0; s < 4; ++s) {
      for (std::size_t t = 0; t < 3; ++t) CHECK(a.U(s, k, t) == 0.0);
    }
  }
  CHECK_FALSE(a.icer(0).value.has_value());
  CHECK(a.icer(0).direction == 0);
}

TEST_CASE("cost-neutral comparison has ICER 0") {
  Matrix e(2, 2), c(2, 2, 7.0);
  e(0, 1) = 1.0;
  e(1, 1) = 2.0;
  const Analysis a = new_analysis(make_dataset(e, c), 1, std::nullopt, 10.0, 3);
  REQUIRE(a.icer(0).value.has_value());
  CHECK(*a.icer(0).value == 0.0);
}

TEST_CASE("an arm that wins every simulation leaves no opportunity loss") {
  Matrix e(5, 2), c(5, 2);
  for (std::size_t s = 0; s < 5; ++s) {
    e(s, 0) = 1.0 + 0.1 * static_cast<double>(s);
    c(s, 0) = 5.0;
    e(s, 1) = 0.5;
    c(s, 1) = 9.0 + static_cast<double>(s);
  }
  const Analysis a = new_analysis(make_dataset(e, c), 0, std::nullopt, 100.0, 11);
  for (std::size_t k = 0; k < a.n_k(); ++k) {
    CHECK(a.evi(k) == 0.0);
    CHECK(a.best(k) == 0);
  }
}

TEST_CASE("default configuration") {
  const Analysis a = new_analysis(tiny_dataset(), 1);
  CHECK(a.n_k() == kDefaultGridPoints);
  CHECK(a.grid().kmax() == kDefaultKmax);
  CHECK(a.grid()[0] == 0.0);
  // Granularity <= 0.2% of kmax.
  CHECK(a.grid()[1] - a.grid()[0] <= 0.002 * kDefaultKmax);
}

TEST_CASE("four-arm setup with the last arm as reference") {
  std::mt19937_64 rng(11);
  const Analysis a = new_analysis(random_dataset(rng, 200, 4), 3, std::nullopt, 500.0);
  CHECK(a.comparisons() == std::vector<std::size_t>{0, 1, 2});
  CHECK(a.grid().kmax() == 500.0);
  CHECK(a.n_k() == 501);
}

TEST_CASE("input validation") {
  const PsaDataset d = tiny_dataset();
  CHECK_THROWS_AS(new_analysis(d, 2), ValidationError);
  CHECK_THROWS_AS(new_analysis(d, 1, std::vector<std::size_t>{1}), ValidationError);
  CHECK_THROWS_AS(new_analysis(d, 1, std::vector<std::size_t>{}), ValidationError);
  CHECK_THROWS_AS(new_analysis(d, 1, std::nullopt, 0.0), ValidationError);
  CHECK_THROWS_AS(new_analysis(d, 1, std::nullopt, -5.0), ValidationError);

  CHECK_THROWS_AS(make_dataset(Matrix(3, 2), Matrix(3, 3)), ValidationError);
  CHECK_THROWS_AS(make_dataset(Matrix(1, 2), Matrix(1, 2)), ValidationError);
  CHECK_THROWS_AS(make_dataset(Matrix(3, 1), Matrix(3, 1)), ValidationError);
  CHECK_THROWS_AS(make_dataset(Matrix(3, 2), Matrix(3, 2), {"a", "a"}), ValidationError);
  CHECK_THROWS_AS(make_dataset(Matrix(3, 2), Matrix(3, 2), {"a", ""}), ValidationError);
  Matrix bad(3, 2);
  bad(1, 1) = std::nan("");
  try {
    make_dataset(bad, Matrix(3, 2));
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 2, column 2") != std::string::npos);
  }

  CHECK_THROWS_AS(WtpGrid::from_values({1, 2}), ValidationError);
  CHECK_THROWS_AS(WtpGrid::from_values({0, 2, 2}), ValidationError);
}

TEST_CASE("grid refinement leaves grid-free statistics unchanged") {
  std::mt19937_64 rng(3);
  const PsaDataset d = random_dataset(rng, 50, 3);
  const Analysis coarse = new_analysis(d, 0, std::nullopt, 1000.0, 101);
  const Analysis fine = new_analysis(d, 0, std::nullopt, 1000.0, 201);
  for (std::size_t j = 0; j < coarse.n_comparisons(); ++j) {
    CHECK(coarse.icer(j) == fine.icer(j));
    for (std::size_t s = 0; s < 50; ++s) {
      CHECK(coarse.delta_e(s, j) == fine.delta_e(s, j));
      CHECK(coarse.delta_c(s, j) == fine.delta_c(s, j));
    }
  }
  // Shared grid points carry identical utilities.
  for (std::size_t k = 0; k < coarse.n_k(); ++k) {
    REQUIRE(coarse.grid()[k] == fine.grid()[2 * k]);
    for (std::size_t s = 0; s < 50; ++s) {
      for (std::size_t t = 0; t < 3; ++t) CHECK(coarse.U(s, k, t) == fine.U(s, 2 * k, t));
    }
  }
}

TEST_CASE("statistics match the naive loop oracle exactly") {
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<std::size_t> sims(2, 6), arms(2, 3);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n_int = arms(rng);
    const PsaDataset d = random_dataset(rng, sims(rng), n_int);
    const Analysis a = new_analysis(d, rep % n_int, std::nullopt, 1000.0, 21);
    const NaiveResult o = naive_analysis(naive_input(a));
    CHECK(o.kstar == a.kstar());
    for (std::size_t j = 0; j < a.n_comparisons(); ++j) CHECK(o.icer[j] == a.icer(j).value);
    for (std::size_t k = 0; k < a.n_k(); ++k) {
      const auto& r = o.at[k];
      CHECK(r.best == a.best(k));
      CHECK(r.evi == a.evi(k));
      for (std::size_t s = 0; s < a.n_sim(); ++s) {
        CHECK(r.ustar[s] == a.Ustar(s, k));
        CHECK(r.ol[s] == a.ol(s, k));
        CHECK(r.vi[s] == a.vi(s, k));
      }
      for (std::size_t j = 0; j < a.n_comparisons(); ++j) {
        CHECK(r.eib[j] == a.eib(k, j));
        CHECK(r.ceac[j] == a.ceac(k, j));
      }
    }
  }
}

TEST_CASE("decision coherence: single comparison switches at the first grid value >= ICER") {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const Analysis a = new_analysis(random_dataset(rng, 40, 2), 1, std::nullopt, 1000.0, 201);
    const Icer& icer = a.icer(0);
    if (!(icer.mean_delta_e > 0.0 && icer.value && *icer.value > 0.0 && *icer.value < 1000.0)) {
      continue;
    }
    ++checked;
    REQUIRE(a.kstar().size() == 1);
    const auto& g = a.grid().values();
    const auto it = std::lower_bound(g.begin(), g.end(), *icer.value);
    // An ICER within rounding of a grid point may switch on either side.
    const bool near_grid = std::fabs(*it - *icer.value) <= 1e-9 * *it ||
                           std::fabs(*(it - 1) - *icer.value) <= 1e-9 * *it;
    if (!near_grid) CHECK(a.kstar()[0] == *it);
  }
  CHECK(checked > 5);
}

TEST_CASE("summary of TINY") {
  const Analysis a = tiny_analysis();
  SUBCASE("k = 20") {
    const SummaryBlock b = summarize(a, 20);
    CHECK(b.reference == "New");
    CHECK(b.comparators == std::vector<std::string>{"Status quo"});
    CHECK(b.k == 20.0);
    CHECK_FALSE(b.snapped());
    REQUIRE(b.comparisons.size() == 1);
    CHECK(b.comparisons[0].eib == 5.0);
    CHECK(b.comparisons[0].ceac == doctest::Approx(2.0 / 3.0));
    CHECK(*b.comparisons[0].icer == 15.0);
    CHECK(b.evpi == doctest::Approx(5.0 / 3.0));
    CHECK(b.optimal == "New");
    CHECK(b.decision == "choose Status quo for k < 15 and New for k >= 15");
  }
  SUBCASE("k = 0") {
    const SummaryBlock b = summarize(a, 0);
    CHECK(b.optimal == "Status quo");
    CHECK(b.comparisons[0].eib == -15.0);
  }
  SUBCASE("snapping and range") {
    const SummaryBlock b = summarize(a, 21);
    CHECK(b.k == 20.0);
    CHECK(b.snapped());
    CHECK(to_text(b).find("requested k = 21") != std::string::npos);
    CHECK_THROWS_AS(summarize(a, -1), ValidationError);
    CHECK_THROWS_AS(summarize(a, 31), ValidationError);
  }
}

TEST_CASE("sim_table of TINY") {
  const Analysis a = tiny_analysis();
  const SimTable t = sim_table(a, 20);
  CHECK(t.columns == std::vector<std::string>{"U1", "U2", "U*", "IB2_1", "OL", "VI"});
  REQUIRE(t.rows.rows() == 3);
  const double row3[] = {10, 5, 10, -5, 5, -5};
  for (std::size_t c = 0; c < 6; ++c) CHECK(t.rows(2, c) == row3[c]);
  // OL = U* - U[chosen arm]
  for (std::size_t s = 0; s < 3; ++s) CHECK(t.rows(s, 4) == t.rows(s, 2) - t.rows(s, 1));
  CHECK_THROWS_AS(sim_table(a, 100), ValidationError);
}

TEST_CASE("number formatting") {
  CHECK(format_significant(-36.0541) == "-36.054");
  CHECK(format_significant(1.22841) == "1.2284");
  CHECK(format_significant(20098.4) == "20098");
  CHECK(format_significant(123456.7) == "123457");
  CHECK(format_significant(0.0) == "0");
  CHECK(format_significant(-0.0) == "0");
}
