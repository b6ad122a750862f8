#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/exact.hpp"

using namespace sawlab;

namespace {

void check_close(double a, double b, double rel) {
  CHECK(std::abs(a - b) <= rel * std::max(1.0, std::abs(b)));
}

}  // namespace

TEST_CASE("enumeration matches the naive oracle on small cases") {
  const std::vector<std::pair<int, int>> cases{{1, 10}, {2, 6}, {3, 4}, {4, 3}};
  for (auto [d, n] : cases) {
    const oracle::NaiveWalks naive(d, n);
    const auto table = enumerate_table(d, n);
    for (double beta : {0.0, 0.5, 1.0, 2.0}) {
      const auto want = naive.moments(beta);
      const auto got = moments_from_table(table, beta);
      check_close(got.Z, want.Z, 1e-12);
      check_close(got.mean_chi, want.mean_chi, 1e-12);
      check_close(got.mean_chi2, want.mean_chi2, 1e-12);
      check_close(got.mean_J, want.mean_J, 1e-12);
    }
  }
}

TEST_CASE("closed forms for one-dimensional walks") {
  const auto m = enumerate_ensemble(1, 2, 1.0);
  check_close(m.mean_chi, 2.0 / (1.0 + std::exp(-1.0)), 1e-14);
  const auto m1 = enumerate_ensemble(1, 1, 3.0);
  check_close(m1.Z, 1.0, 1e-15);
  check_close(m1.mean_chi, 1.0, 1e-15);
}

TEST_CASE("free walk second moment equals n") {
  for (int d = 1; d <= 3; ++d) {
    for (int n = 1; n <= 7; ++n) check_close(enumerate_ensemble(d, n, 0.0).mean_chi2, n, 1e-12);
  }
}

TEST_CASE("histogram weights sum to Z times the path count") {
  const auto m = enumerate_ensemble(2, 7, 0.7);
  double w = 0.0;
  std::uint64_t c = 0;
  for (const auto& b : m.histogram) {
    w += b.weight;
    c += b.count;
  }
  CHECK(c == 16384);
  check_close(w / 16384.0, m.Z, 1e-12);
}

TEST_CASE("threaded enumeration gives the same table") {
  const auto a = enumerate_table(2, 9, kDefaultEnumerationBudget, 1);
  const auto b = enumerate_table(2, 9, kDefaultEnumerationBudget, 3);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].silt == b.cells[i].silt);
    CHECK(a.cells[i].chi2 == b.cells[i].chi2);
    CHECK(a.cells[i].count == b.cells[i].count);
  }
}

TEST_CASE("budget guard") {
  CHECK_THROWS_AS(enumerate_ensemble(3, 40, 1.0), BudgetExceeded);
  CHECK_THROWS_AS(enumerate_table(2, 12, 1000), BudgetExceeded);
}

TEST_CASE("self-avoiding walk counts") {
  const std::vector<std::uint64_t> d2{4, 12, 36, 100, 284, 780};
  const std::vector<std::uint64_t> d3{6, 30, 150, 726, 3534};
  for (int n = 1; n <= 6; ++n) CHECK(saw_count(2, n).count == d2[n - 1]);
  for (int n = 1; n <= 5; ++n) CHECK(saw_count(3, n).count == d3[n - 1]);
  for (int n = 1; n <= 5; ++n) CHECK(saw_count(2, n).count == oracle::all_saws(2, n).size());
  for (int d = 1; d <= 3; ++d) {
    for (int n = 1; n <= 6; ++n) {
      const auto c = saw_count(d, n);
      CHECK(static_cast<double>(c.count) >= std::pow(d, n));
      CHECK(static_cast<double>(c.count) <= 2.0 * d * std::pow(2.0 * d - 1.0, n - 1));
      CHECK(c.connective_estimate >= d - 1e-12);
      CHECK(c.connective_estimate <= 2.0 * d);
    }
  }
  CHECK_THROWS_AS(saw_count(3, 30, 1000), BudgetExceeded);
}

TEST_CASE("return probabilities") {
  const auto p1 = return_probabilities(1, 8);
  check_close(p1[0], 1.0, 1e-15);
  CHECK(p1[1] == 0.0);
  check_close(p1[2], 0.5, 1e-15);
  check_close(p1[4], 6.0 / 16.0, 1e-15);
  const auto p2 = return_probabilities(2, 40);
  const auto q1 = return_probabilities(1, 40);
  for (int m = 0; m <= 40; ++m) check_close(p2[m], q1[m] * q1[m], 1e-13);
}

TEST_CASE("mean silt of the free walk agrees with enumeration") {
  for (int d = 1; d <= 3; ++d) {
    for (int n = 1; n <= 7; ++n) {
      check_close(srw_silt_mean(d, n), enumerate_ensemble(d, n, 0.0).mean_J, 1e-12);
    }
  }
  CHECK_THROWS_AS(srw_silt_mean(1, 6000), CapExceeded);
}

TEST_CASE("upper band check") {
  const auto table = enumerate_table(2, 8);
  const oracle::NaiveWalks naive(2, 8);
  const double beta = 1.0;
  const double B = std::log(4.0);
  double lhs = 0.0, rhs = 0.0;
  for (const auto& [key, count] : naive.counts()) {
    const double w = static_cast<double>(count) * std::exp(-beta * static_cast<double>(key.first)) / 65536.0;
    if (static_cast<double>(key.first) > B * 8) lhs += w;
    if (key.first == 0) rhs += w;
  }
  const auto rep = silt_band_check(table, beta, B);
  check_close(rep.lhs, lhs, 1e-12);
  check_close(rep.rhs, rhs, 1e-12);
  CHECK(rep.holds == (lhs < rhs));
  CHECK(rep.b_star_lower <= rep.b_star_plugin + 1e-12);
  CHECK(rep.b_star_plugin <= rep.b_star_upper + 1e-12);

  const auto hard = silt_band_check(table, 50.0, 0.1);
  CHECK(hard.holds);
  CHECK_THROWS_AS(silt_band_check(table, 0.0, 1.0), ParamError);
}

TEST_CASE("lower band trend report") {
  const std::vector<int> grid{4, 6, 8};
  const auto trend = silt_lower_band_trend(2, grid, 1.0, 0.1, 0.1);
  REQUIRE(trend.rows.size() == 3);
  for (const auto& r : trend.rows) {
    CHECK(r.lhs >= 0.0);
    CHECK(r.rhs > 0.0);
    check_close(r.ratio, r.lhs / r.rhs, 1e-12);
  }
}

TEST_CASE("for_each_path visits every walk once in lexicographic order") {
  std::uint64_t count = 0;
  std::vector<int> first;
  double chi2 = 0.0;
  for_each_path(2, 5, [&](std::span<const Step> steps, std::span<const Coord> sites) {
    if (count == 0) {
      for (auto s : steps) first.push_back(s.code());
    }
    ++count;
    chi2 += sites[10] * sites[10] + sites[11] * sites[11];
  });
  CHECK(count == 1024);
  CHECK(first == std::vector<int>{1, 1, 1, 1, 1});
  check_close(chi2 / 1024.0, 5.0, 1e-15);
}
